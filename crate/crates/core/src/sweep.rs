//! Seeded knapsack sweeps over the scenario count `t` or the dimension `n_y`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generate::generate_knapsack;
use crate::greedy::{greedy_min_k, guarantee_ratio};
use crate::rational::format_q;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVar {
    T,
    N,
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepVar::T => "t",
            SweepVar::N => "n",
        })
    }
}

impl FromStr for SweepVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t" => Ok(SweepVar::T),
            "n" | "n_y" => Ok(SweepVar::N),
            other => Err(Error::InvalidArgument(format!("unknown sweep variable {other:?} (expected t or n)"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub var: SweepVar,
    pub values: Vec<usize>,
    /// `n_y` when sweeping over `t`.
    pub n_y: usize,
    /// `t` when sweeping over `n_y`.
    pub t: usize,
    pub reps: usize,
    pub base_seed: u64,
    /// Worker threads; `None` runs sequentially.
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_var: SweepVar,
    pub value: usize,
    pub rep: usize,
    pub seed: u64,
    pub v_star: String,
    pub k_lb: usize,
    pub k_ub: usize,
    pub runtime_ms: f64,
    pub guarantee_bound: f64,
}

/// Seed of repetition `rep` at the `value_index`-th sweep value.
pub fn seed_for(base: u64, value_index: usize, rep: usize) -> u64 {
    base.wrapping_add(1000 * value_index as u64).wrapping_add(rep as u64)
}

/// Parses `"20,40,60"`, `"10..20"` (inclusive) and `"20,40,...,100"`
/// (arithmetic continuation from the two preceding values).
pub fn parse_values(text: &str) -> Result<Vec<usize>> {
    let bad = |msg: String| Error::InvalidArgument(format!("sweep values {text:?}: {msg}"));
    let mut out: Vec<usize> = Vec::new();
    let tokens: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    let mut i = 0;
    while i < tokens.len() {
        let tok = tokens[i];
        if tok == "..." {
            let end: usize = tokens
                .get(i + 1)
                .ok_or_else(|| bad("`...` needs a final value".into()))?
                .parse()
                .map_err(|_| bad(format!("invalid number {:?}", tokens[i + 1])))?;
            if out.len() < 2 {
                return Err(bad("`...` needs two preceding values".into()));
            }
            let (a, b) = (out[out.len() - 2], out[out.len() - 1]);
            if b <= a {
                return Err(bad("`...` needs increasing values".into()));
            }
            let step = b - a;
            if end < b || (end - b) % step != 0 {
                return Err(bad(format!("{end} is not reachable from {b} in steps of {step}")));
            }
            let mut v = b + step;
            while v <= end {
                out.push(v);
                v += step;
            }
            i += 2;
            continue;
        }
        if let Some((lo, hi)) = tok.split_once("..") {
            let lo: usize = lo.trim().parse().map_err(|_| bad(format!("invalid range {tok:?}")))?;
            let hi: usize = hi.trim().parse().map_err(|_| bad(format!("invalid range {tok:?}")))?;
            if lo > hi {
                return Err(bad(format!("empty range {tok:?}")));
            }
            out.extend(lo..=hi);
        } else {
            out.push(tok.parse().map_err(|_| bad(format!("invalid number {tok:?}")))?);
        }
        i += 1;
    }
    if out.is_empty() {
        return Err(bad("no values".into()));
    }
    if out.contains(&0) {
        return Err(bad("values must be positive".into()));
    }
    Ok(out)
}

fn run_one(cfg: &SweepConfig, value_index: usize, rep: usize) -> Result<SweepRow> {
    let value = cfg.values[value_index];
    let (n_y, t) = match cfg.var {
        SweepVar::T => (cfg.n_y, value),
        SweepVar::N => (value, cfg.t),
    };
    let seed = seed_for(cfg.base_seed, value_index, rep);
    let inst = generate_knapsack(n_y, t, seed)?;
    let start = Instant::now();
    let res = greedy_min_k(&inst)?;
    let runtime_ms = (start.elapsed().as_secs_f64() * 1e6).round() / 1e3;
    Ok(SweepRow {
        sweep_var: cfg.var,
        value,
        rep,
        seed,
        v_star: format_q(&res.optimal_value),
        k_lb: res.k_lb,
        k_ub: res.k_ub,
        runtime_ms,
        guarantee_bound: guarantee_ratio(t),
    })
}

/// Runs every `(value, rep)` pair; rows come back sorted by value, then rep,
/// whatever the thread count.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.values.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one value".into()));
    }
    if cfg.reps == 0 {
        return Err(Error::InvalidArgument("sweep needs at least one repetition".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..cfg.values.len())
        .flat_map(|v| (0..cfg.reps).map(move |r| (v, r)))
        .collect();
    let mut rows: Vec<SweepRow> = match cfg.threads {
        None | Some(0) | Some(1) => jobs.iter().map(|&(v, r)| run_one(cfg, v, r)).collect::<Result<_>>()?,
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start {n} worker threads: {e}")))?
            .install(|| jobs.par_iter().map(|&(v, r)| run_one(cfg, v, r)).collect::<Result<_>>())?,
    };
    rows.sort_by_key(|r| (r.value, r.rep));
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_syntax() {
        assert_eq!(parse_values("20,40,...,100").unwrap(), vec![20, 40, 60, 80, 100]);
        assert_eq!(parse_values("10..13").unwrap(), vec![10, 11, 12, 13]);
        assert_eq!(parse_values(" 3, 5 ,8").unwrap(), vec![3, 5, 8]);
        assert_eq!(parse_values("1,2..3,...,5").unwrap(), vec![1, 2, 3, 4, 5]);
        for bad in ["", ",", "a", "5..2", "10,...,20", "20,40,...,90", "0,1"] {
            assert!(parse_values(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn seeds_are_distinct_per_run() {
        assert_eq!(seed_for(7, 0, 0), 7);
        assert_eq!(seed_for(7, 2, 3), 2010);
    }

    #[test]
    fn sweep_is_deterministic_and_ordered() {
        let cfg = SweepConfig {
            var: SweepVar::T,
            values: vec![6, 3],
            n_y: 6,
            t: 0,
            reps: 2,
            base_seed: 11,
            threads: None,
        };
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&SweepConfig {
            threads: Some(3),
            ..cfg.clone()
        })
        .unwrap();
        let key = |rows: &[SweepRow]| -> Vec<_> {
            rows.iter()
                .map(|r| (r.value, r.rep, r.seed, r.v_star.clone(), r.k_lb, r.k_ub))
                .collect()
        };
        assert_eq!(key(&a), key(&b));
        assert_eq!(a.iter().map(|r| r.value).collect::<Vec<_>>(), vec![3, 3, 6, 6]);
        assert!(a.iter().all(|r| r.k_lb <= r.k_ub && r.k_ub <= r.value));

        let mut buf = Vec::new();
        write_csv(&a, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("sweep_var,value,rep,seed,v_star,k_lb,k_ub,runtime_ms,guarantee_bound\n"));
        assert_eq!(text.lines().count(), 5);
    }
}
