//! Closed-form bounds on the number of policies `k` and on the
//! approximation gap of k-adaptability.
//!
//! Finite expressions are reported in place of asymptotic ones: a region
//! count `R = Σ_{i≤e} C(η, i)` and `k ≤ min{R·(n_ξ+1), |Y|}`, or
//! `k ≤ min{R, |Y|}` when the objective does not depend on `ξ`.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::instance::{AffineInstance, YSpace};
use crate::rational::{ceil_to_bigint, floor_to_bigint, Q};

/// `|Y|` up to which extremes over `Y` are computed by enumeration.
pub const EXACT_Y_GUARD: u64 = 1 << 16;
/// Largest point count for the pairwise diameter computation.
pub const DIAM_PAIR_GUARD: usize = 4096;
/// Tolerance applied before rounding up in [`policies_for_alpha`].
pub const CEIL_TOLERANCE: f64 = 1e-9;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::InvalidArgument(format!("{name} must be finite and nonnegative, got {v}")));
    }
    Ok(())
}

/// `n_ξ + 1` policies suffice when only the objective is uncertain.
pub fn objective_bound(n_xi: u64) -> Result<u64> {
    if n_xi == 0 {
        return Err(Error::InvalidArgument("n_xi must be at least 1".into()));
    }
    n_xi.checked_add(1).ok_or(Error::Overflow("computing n_xi + 1"))
}

/// `opt(s) − opt(k) ≤ L·diam(Y)·ln(k/s)`.
pub fn approx_gap(l: f64, diam_y: f64, s: u64, k: u64) -> Result<f64> {
    check_positive("L", l)?;
    check_positive("diam(Y)", diam_y)?;
    if s == 0 || s > k {
        return Err(Error::InvalidArgument(format!("need 1 <= s <= k, got s = {s}, k = {k}")));
    }
    Ok(l * diam_y * (k as f64 / s as f64).ln())
}

/// Smallest `k` with `opt(k) ≤ opt(2RO) + α`, i.e. `⌈(n_ξ+1)·e^{−α/(L·diam Y)}⌉`,
/// at least 1.
pub fn policies_for_alpha(l: f64, diam_y: f64, n_xi: u64, alpha: f64) -> Result<u64> {
    check_positive("L", l)?;
    check_positive("diam(Y)", diam_y)?;
    check_positive("alpha", alpha)?;
    let c = l * diam_y;
    let full = n_xi as f64 + 1.0;
    if c == 0.0 {
        return Ok(1);
    }
    let raw = full * (-alpha / c).exp();
    Ok(((raw - CEIL_TOLERANCE).ceil() as u64).clamp(1, n_xi + 1))
}

/// `L·diam(Y)·ln((n_ξ+1)/s)`, the gap achieved with `k = R·s` policies.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintGap {
    pub k: u64,
    pub gap: f64,
}

pub fn constraint_approx_gap(l: f64, diam_y: f64, n_xi: u64, r: u64, s: u64) -> Result<ConstraintGap> {
    check_positive("L", l)?;
    check_positive("diam(Y)", diam_y)?;
    if s == 0 || s > n_xi + 1 {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= s <= n_xi + 1 = {}, got {s}",
            n_xi + 1
        )));
    }
    Ok(ConstraintGap {
        k: r.checked_mul(s).ok_or(Error::Overflow("computing R * s"))?,
        gap: l * diam_y * ((n_xi + 1) as f64 / s as f64).ln(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Diameter {
    pub value: f64,
    /// `false` when only the bounding-box diameter could be computed.
    pub exact: bool,
}

/// Euclidean diameter of `Y`: the box diagonal when `Y` is a plain box,
/// otherwise the exact pairwise maximum when `Y` is small enough, else the
/// box diagonal flagged as an upper bound.
pub fn diam_of_yspace(y: &YSpace) -> Diameter {
    let box_diam = || {
        let sq: i128 = y
            .lower
            .iter()
            .zip(&y.upper)
            .map(|(&lo, &hi)| {
                let d = (hi - lo).max(0) as i128;
                d * d
            })
            .sum();
        (sq as f64).sqrt()
    };
    if y.constraints.is_empty() && !y.is_explicit() {
        return Diameter {
            value: box_diam(),
            exact: true,
        };
    }
    match y.enumerate_with_guard(EXACT_Y_GUARD) {
        Ok(points) if points.len() <= DIAM_PAIR_GUARD => {
            let mut best: i128 = 0;
            for (i, p) in points.iter().enumerate() {
                for q in &points[i + 1..] {
                    let sq: i128 = p
                        .iter()
                        .zip(q)
                        .map(|(&a, &b)| {
                            let d = (a - b) as i128;
                            d * d
                        })
                        .sum();
                    best = best.max(sq);
                }
            }
            Diameter {
                value: (best as f64).sqrt(),
                exact: true,
            }
        }
        _ => Diameter {
            value: box_diam(),
            exact: false,
        },
    }
}

/// Minimum and maximum of linear forms over `Y`.
struct YExtremes {
    points: Option<Vec<Vec<i64>>>,
    lower: Vec<i64>,
    upper: Vec<i64>,
}

impl YExtremes {
    fn new(y: &YSpace) -> Result<Self> {
        let points = if y.constraints.is_empty() && !y.is_explicit() {
            None
        } else if y.candidate_count() <= BigUint::from(EXACT_Y_GUARD) {
            Some(y.enumerate_with_guard(EXACT_Y_GUARD)?)
        } else {
            None
        };
        if points.as_ref().is_some_and(Vec::is_empty) || y.lower.iter().zip(&y.upper).any(|(l, u)| l > u) {
            return Err(Error::InvalidInstance("second-stage set Y is empty".into()));
        }
        Ok(Self {
            points,
            lower: y.lower.clone(),
            upper: y.upper.clone(),
        })
    }

    fn range(&self, row: &[i64]) -> (i128, i128) {
        let dot = |p: &[i64]| -> i128 { row.iter().zip(p).map(|(&a, &b)| a as i128 * b as i128).sum() };
        match &self.points {
            Some(points) => {
                let vals = points.iter().map(|p| dot(p));
                let lo = vals.clone().min().expect("nonempty");
                (lo, vals.max().expect("nonempty"))
            }
            None => row
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .fold((0, 0), |(lo, hi), (&a, (&l, &u))| {
                    let (p, q) = (a as i128 * l as i128, a as i128 * u as i128);
                    (lo + p.min(q), hi + p.max(q))
                }),
        }
    }
}

fn x_range(points: &[Vec<i64>], row: &[i64]) -> (i128, i128) {
    let vals = points
        .iter()
        .map(|x| row.iter().zip(x).map(|(&a, &b)| a as i128 * b as i128).sum::<i128>());
    let lo = vals.clone().min().unwrap_or(0);
    (lo, vals.max().unwrap_or(0))
}

fn check_x_points(inst: &AffineInstance) -> Result<()> {
    if inst.x_points.is_empty() {
        return Err(Error::InvalidInstance("first-stage set X is empty".into()));
    }
    Ok(())
}

/// Result of the integer-range `η` procedure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EtaInteger {
    /// `(v_i, v̄_i)` for `i = 0..=n_ξ`; index 0 is the right-hand side.
    pub ranges: Vec<(i128, i128)>,
    #[serde(serialize_with = "ser_big")]
    pub value: BigUint,
}

/// `η ≤ ∏_{i=0}^{n_ξ} (v̄_i − v_i + 1)` from the ranges of the integer
/// coefficients `A^i x + B^i y − H_i` and right-hand sides `h − A x − B y`
/// over `X × Y`, never below 1.
///
/// With `trim_rhs`, right-hand-side values outside the range of the
/// left-hand side over the box of `U` are dropped.
pub fn eta_integer_x(inst: &AffineInstance, trim_rhs: bool) -> Result<EtaInteger> {
    check_x_points(inst)?;
    let ys = YExtremes::new(&inst.y_space)?;
    let mut ranges = Vec::with_capacity(inst.n_xi + 1);
    let (mut lo0, mut hi0) = (i128::MAX, i128::MIN);
    for l in 0..inst.m {
        let (xl, xh) = x_range(&inst.x_points, &inst.a[l]);
        let (yl, yh) = ys.range(&inst.b[l]);
        let h = inst.h[l] as i128;
        lo0 = lo0.min(h - xh - yh);
        hi0 = hi0.max(h - xl - yl);
    }
    ranges.push((lo0, hi0));
    for i in 0..inst.n_xi {
        let (mut lo, mut hi) = (i128::MAX, i128::MIN);
        for l in 0..inst.m {
            let (xl, xh) = x_range(&inst.x_points, &inst.ai[i][l]);
            let (yl, yh) = ys.range(&inst.bi[i][l]);
            let hm = inst.h_mat[l][i] as i128;
            lo = lo.min(xl + yl - hm);
            hi = hi.max(xh + yh - hm);
        }
        ranges.push((lo, hi));
    }
    if trim_rhs && inst.m > 0 {
        let (mut lhs_lo, mut lhs_hi) = (Q::zero(), Q::zero());
        for (i, &(lo, hi)) in ranges.iter().enumerate().skip(1) {
            let (ul, uh) = (&inst.u_box.lower[i - 1], &inst.u_box.upper[i - 1]);
            let corners = [
                Q::from_integer(BigInt::from(lo)) * ul,
                Q::from_integer(BigInt::from(lo)) * uh,
                Q::from_integer(BigInt::from(hi)) * ul,
                Q::from_integer(BigInt::from(hi)) * uh,
            ];
            lhs_lo += corners.iter().min().expect("four corners").clone();
            lhs_hi += corners.iter().max().expect("four corners").clone();
        }
        let lo = ceil_to_bigint(&lhs_lo).to_i128().ok_or(Error::Overflow("trimming rhs range"))?;
        let hi = floor_to_bigint(&lhs_hi).to_i128().ok_or(Error::Overflow("trimming rhs range"))?;
        ranges[0] = (ranges[0].0.max(lo), ranges[0].1.min(hi));
    }
    let value = if inst.m == 0 {
        BigUint::zero()
    } else {
        ranges.iter().fold(BigUint::one(), |acc, &(lo, hi)| {
            acc * BigUint::from((hi - lo + 1).max(0) as u128)
        })
    };
    Ok(EtaInteger {
        ranges,
        value: value.max(BigUint::one()),
    })
}

/// Result of the row-wise summation `η` procedure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EtaMixed {
    /// `β^i_l` for each row `l` and `i = 0..=n_ξ` (index 0 uses `B`).
    pub beta: Vec<Vec<u128>>,
    #[serde(serialize_with = "ser_big")]
    pub value: BigUint,
}

/// `η ≤ Σ_l ∏_{i=0}^{n_ξ} β^i_l` with
/// `β^i_l = max_Y y·b^i_l − min_Y y·b^i_l + 1`, never below 1.
pub fn eta_mixed_x(inst: &AffineInstance) -> Result<EtaMixed> {
    let ys = YExtremes::new(&inst.y_space)?;
    let width = |row: &[i64]| {
        let (lo, hi) = ys.range(row);
        (hi - lo + 1) as u128
    };
    let beta: Vec<Vec<u128>> = (0..inst.m)
        .map(|l| {
            std::iter::once(width(&inst.b[l]))
                .chain((0..inst.n_xi).map(|i| width(&inst.bi[i][l])))
                .collect()
        })
        .collect();
    let value = beta
        .iter()
        .map(|row| row.iter().fold(BigUint::one(), |acc, &b| acc * BigUint::from(b)))
        .sum::<BigUint>()
        .max(BigUint::one());
    Ok(EtaMixed { beta, value })
}

/// Rank by fraction-free (Bareiss) elimination.
pub fn integer_rank(matrix: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = matrix
        .iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for i in rank + 1..rows {
            for j in col + 1..cols {
                let v = (&m[rank][col] * &m[i][j] - &m[i][col] * &m[rank][j]) / &prev;
                m[i][j] = v;
            }
            m[i][col] = BigInt::zero();
        }
        prev = m[rank][col].clone();
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// `ω = max_{x∈X} rank(A¹x − H_1, …, A^{n_ξ}x − H_{n_ξ})`.
pub fn omega(inst: &AffineInstance) -> Result<usize> {
    check_x_points(inst)?;
    Ok(inst
        .x_points
        .iter()
        .map(|x| integer_rank(&inst.xi_matrix(x)))
        .max()
        .unwrap_or(0))
}

/// `Σ_{i=0}^{rank} C(η, i)`, the most regions `η` hyperplanes can cut a
/// space of dimension `rank` into.
pub fn region_count_bound(eta: impl Into<BigUint>, rank: usize) -> BigUint {
    let eta = eta.into();
    let mut total = BigUint::zero();
    let mut term = BigUint::one();
    for i in 0..=rank {
        if i > 0 {
            let i_big = BigUint::from(i);
            if i_big > eta {
                break;
            }
            term = term * (&eta - &i_big + BigUint::one()) / i_big;
        }
        total += &term;
    }
    total
}

/// `|J|^p · d^p`.
pub fn table_product(j: u64, p: u32, d: u64) -> BigUint {
    BigUint::from(j).pow(p) * BigUint::from(d).pow(p)
}

fn ser_big<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v.to_u64() {
        Some(small) => s.serialize_u64(small),
        None => s.serialize_str(&v.to_string()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum BoundValue {
    Integer(#[serde(serialize_with = "ser_big")] BigUint),
    Float(f64),
}

impl std::fmt::Display for BoundValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundValue::Integer(v) => write!(f, "{v}"),
            BoundValue::Float(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceItem {
    pub symbol: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub value: BoundValue,
    pub assumptions: Vec<String>,
    pub formula_trace: Vec<TraceItem>,
}

impl BoundReport {
    pub fn new(name: impl Into<String>, value: BoundValue) -> Self {
        Self {
            name: name.into(),
            value,
            assumptions: Vec::new(),
            formula_trace: Vec::new(),
        }
    }

    pub fn assume(mut self, text: impl Into<String>) -> Self {
        self.assumptions.push(text.into());
        self
    }

    pub fn trace(mut self, symbol: impl Into<String>, value: impl ToString) -> Self {
        self.formula_trace.push(TraceItem {
            symbol: symbol.into(),
            value: value.to_string(),
        });
        self
    }

    pub fn lookup(&self, symbol: &str) -> Option<&str> {
        self.formula_trace
            .iter()
            .find(|t| t.symbol == symbol)
            .map(|t| t.value.as_str())
    }
}

/// Number of policies sufficient under constraint uncertainty.
///
/// `η` is the smaller of the two procedures, the exponent is `ω` under fixed
/// recourse and `n_ξ` otherwise, and `|Y|` caps the result. Claiming fixed
/// recourse or a `ξ`-free objective that the data contradict is an error.
pub fn constraint_k_bound(inst: &AffineInstance, fixed_recourse: bool, objective_uncertain: bool) -> Result<BoundReport> {
    if fixed_recourse && !inst.is_fixed_recourse() {
        return Err(Error::InvalidArgument(
            "fixed recourse claimed but some B^i is nonzero".into(),
        ));
    }
    if !objective_uncertain && inst.objective_depends_on_xi() {
        return Err(Error::InvalidArgument(
            "objective claimed independent of xi but some C^i is nonzero".into(),
        ));
    }
    let eta_int = eta_integer_x(inst, false)?;
    let eta_mix = eta_mixed_x(inst)?;
    let eta = (&eta_int.value).min(&eta_mix.value).clone();
    let om = omega(inst)?;
    let exponent = if fixed_recourse { om } else { inst.n_xi };
    let r = region_count_bound(eta.clone(), exponent);
    let y_size = match inst.y_space.enumerate_with_guard(EXACT_Y_GUARD) {
        Ok(points) => BigUint::from(points.len()),
        Err(_) => inst.y_space.candidate_count(),
    };
    let factor = BigUint::from(inst.n_xi as u64 + 1);
    let k = if objective_uncertain {
        (&r * &factor).min(y_size.clone())
    } else {
        r.clone().min(y_size.clone())
    };
    let mut report = BoundReport::new("constraint_k_bound", BoundValue::Integer(k));
    report = if fixed_recourse {
        report.assume("fixed recourse: exponent e = omega")
    } else {
        report.assume("random recourse: exponent e = n_xi")
    };
    report = if objective_uncertain {
        report.assume("objective depends on xi: k = min{R*(n_xi+1), |Y|}")
    } else {
        report.assume("objective independent of xi: k = min{R, |Y|}")
    };
    report = report
        .trace("eta_integer", &eta_int.value)
        .trace("eta_mixed", &eta_mix.value)
        .trace("eta", &eta)
        .trace("omega", om)
        .trace("n_xi", inst.n_xi)
        .trace("exponent", exponent)
        .trace("R", &r)
        .trace("|Y|", &y_size);
    if objective_uncertain {
        report = report.trace("R*(n_xi+1)", &r * factor);
    }
    Ok(report)
}
