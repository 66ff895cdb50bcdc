//! Instance generators: the seeded robust minimum-knapsack family, the
//! set-cover reduction, and the built-in worked examples.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`),
//! which is specified independently of platform and word size, so the same
//! `(n_y, t, seed)` triple yields the same instance everywhere.

use num_traits::Zero;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{
    AffineInstance, AffineObjective, Constraint, FiniteInstance, Instance, IntConstraint, Scenario,
    Sense, UncertaintyBox, YSpace,
};
use crate::rational::{q, q_frac, Q};

/// All knapsack data are multiplied by this factor so that `1.5·v` and
/// `0.2·Σā` stay integral.
pub const KNAPSACK_SCALE: i64 = 10;

/// Number of deviating entries per scenario, `⌊n_y / 4⌋`.
pub fn knapsack_gamma(n_y: usize) -> usize {
    n_y / 4
}

/// Robust minimum knapsack `min c(ξ)·y s.t. a(ξ)·y ≥ b, y ∈ {0,1}^n`.
///
/// `ā_i ~ U{40..60}`, `c̄_i ~ U{ā_i−5..ā_i+5}`, `b = 0.2 Σ ā_i`; every
/// scenario raises `Γ` random cost entries and (independently) `Γ` random
/// weight entries to 1.5 times their base value. Stored scaled by
/// [`KNAPSACK_SCALE`].
pub fn generate_knapsack(n_y: usize, t: usize, seed: u64) -> Result<FiniteInstance> {
    if n_y == 0 || t == 0 {
        return Err(Error::InvalidArgument(format!(
            "knapsack needs n_y >= 1 and t >= 1 (got n_y={n_y}, t={t})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a_bar: Vec<i64> = (0..n_y).map(|_| rng.gen_range(40..=60)).collect();
    let c_bar: Vec<i64> = a_bar
        .iter()
        .map(|&a| rng.gen_range(a - 5..=a + 5))
        .collect();
    let gamma = knapsack_gamma(n_y);
    // b = 0.2·Σā, scaled by 10
    let b = 2 * a_bar.iter().sum::<i64>();

    let deviate = |rng: &mut ChaCha8Rng, base: &[i64]| -> Vec<Q> {
        let mut out: Vec<i64> = base.iter().map(|v| v * KNAPSACK_SCALE).collect();
        for i in index::sample(rng, n_y, gamma).into_vec() {
            out[i] = base[i] * KNAPSACK_SCALE * 3 / 2;
        }
        out.into_iter().map(q).collect()
    };

    let scenarios = (0..t)
        .map(|_| {
            let objective = deviate(&mut rng, &c_bar);
            let weights = deviate(&mut rng, &a_bar);
            Scenario {
                objective,
                constraints: vec![Constraint::new(weights, Sense::Ge, q(b))],
            }
        })
        .collect();

    let mut inst = FiniteInstance::new(YSpace::binary(n_y), scenarios);
    inst.name = Some(format!("knapsack(n_y={n_y},t={t})"));
    inst.seed = Some(seed);
    Ok(inst)
}

/// Builds the min-max-min instance whose minimal `k` is the minimum set
/// cover size of `subsets` over `{0, …, universe_size−1}`.
///
/// Scenario `v` is the unit vector `e_v` with objective `−e_v·y`; `Y` is the
/// explicit family of subset indicator vectors. A family of policies reaches
/// value −1 exactly when the corresponding subsets cover the universe.
pub fn reduce_set_cover(universe_size: usize, subsets: &[Vec<usize>]) -> Result<FiniteInstance> {
    if universe_size == 0 || subsets.is_empty() {
        return Err(Error::InvalidArgument(
            "set cover needs a nonempty universe and at least one subset".into(),
        ));
    }
    let mut covered = vec![false; universe_size];
    let mut points = Vec::with_capacity(subsets.len());
    for (k, s) in subsets.iter().enumerate() {
        let mut y = vec![0i64; universe_size];
        for &v in s {
            if v >= universe_size {
                return Err(Error::InvalidArgument(format!(
                    "subset {k} contains element {v} outside the universe 0..{universe_size}"
                )));
            }
            y[v] = 1;
            covered[v] = true;
        }
        points.push(y);
    }
    if let Some(v) = covered.iter().position(|c| !c) {
        return Err(Error::InvalidArgument(format!(
            "subsets do not cover the universe (element {v} missing)"
        )));
    }
    let scenarios = (0..universe_size)
        .map(|v| {
            let mut objective = vec![Q::zero(); universe_size];
            objective[v] = q(-1);
            Scenario {
                objective,
                constraints: Vec::new(),
            }
        })
        .collect();
    let y_space = YSpace::explicit(vec![0; universe_size], vec![1; universe_size], points);
    Ok(FiniteInstance::new(y_space, scenarios).named(format!("setcover(|V|={universe_size})")))
}

/// Unit-vector policies against the 2^n − 1 scenarios "ξ uniform on S" for
/// every nonempty `S ⊆ [n]`. Needs all `n` policies to reach `1/n`.
pub fn simplex_units(n: usize) -> Result<FiniteInstance> {
    if n == 0 || n > 16 {
        return Err(Error::InvalidArgument(format!(
            "simplex-units needs 1 <= n <= 16 (got {n})"
        )));
    }
    let scenarios = (1u32..(1 << n))
        .map(|mask| {
            let size = mask.count_ones() as i64;
            let objective = (0..n)
                .map(|i| {
                    if mask & (1 << i) != 0 {
                        q_frac(1, size)
                    } else {
                        Q::zero()
                    }
                })
                .collect();
            Scenario {
                objective,
                constraints: Vec::new(),
            }
        })
        .collect();
    let y_space = YSpace::binary(n).with_constraint(IntConstraint::new(vec![1; n], Sense::Eq, 1));
    Ok(FiniteInstance::new(y_space, scenarios).named(format!("simplex-units({n})")))
}

/// `Σy ≤ ξ_1 ≤ Σy + 1` over `y ∈ {0,1}^n`, sampled at the midpoints
/// `ξ_1 = j − 1/2`, `j = 1..n`. Objective is identically zero.
pub fn cardinality_band(n: usize) -> Result<FiniteInstance> {
    if n == 0 {
        return Err(Error::InvalidArgument("cardinality-band needs n >= 1".into()));
    }
    let ones = vec![q(1); n];
    let neg_ones = vec![q(-1); n];
    let scenarios = (1..=n as i64)
        .map(|j| {
            let xi = q_frac(2 * j - 1, 2);
            Scenario {
                objective: vec![Q::zero(); n],
                constraints: vec![
                    Constraint::new(ones.clone(), Sense::Le, xi.clone()),
                    Constraint::new(neg_ones.clone(), Sense::Le, q(1) - &xi),
                ],
            }
        })
        .collect();
    Ok(FiniteInstance::new(YSpace::binary(n), scenarios).named(format!("cardinality-band({n})")))
}

/// Affine form of the cardinality band over `U = [0, n]` (n_ξ = 1):
/// `ξ_1 ≥ Σy` and `−ξ_1 ≥ −Σy − 1`.
pub fn cardinality_band_affine(n: usize) -> Result<AffineInstance> {
    if n == 0 {
        return Err(Error::InvalidArgument("cardinality-band needs n >= 1".into()));
    }
    Ok(AffineInstance {
        n_x: 1,
        n_y: n,
        n_xi: 1,
        m: 2,
        x_points: vec![vec![0]],
        y_space: YSpace::binary(n),
        a: vec![vec![0], vec![0]],
        ai: vec![vec![vec![0], vec![0]]],
        b: vec![vec![-1; n], vec![1; n]],
        bi: vec![vec![vec![0; n], vec![0; n]]],
        h_mat: vec![vec![-1], vec![1]],
        h: vec![0, -1],
        u_box: UncertaintyBox::new(vec![q(0)], vec![q(n as i64)]),
        objective: AffineObjective::zero(n),
        name: Some(format!("cardinality-band-affine({n})")),
    })
}

/// `−y_1 + ξ_2 y_2 ≤ ξ_1`, `y_1 + 3y_2 ≥ ξ_2`, `y ∈ {0,1}²`,
/// `U = [3/2, 7/2] × [1/2, 2]`, no first stage.
///
/// Rewritten as `ξ_1 − y_2 ξ_2 ≥ −y_1` and `−ξ_2 ≥ −y_1 − 3 y_2`.
pub fn recourse_regions() -> AffineInstance {
    AffineInstance {
        n_x: 1,
        n_y: 2,
        n_xi: 2,
        m: 2,
        x_points: vec![vec![0]],
        y_space: YSpace::binary(2),
        a: vec![vec![0], vec![0]],
        ai: vec![vec![vec![0], vec![0]], vec![vec![0], vec![0]]],
        b: vec![vec![1, 0], vec![1, 3]],
        bi: vec![vec![vec![0, 0], vec![0, 0]], vec![vec![0, -1], vec![0, 0]]],
        h_mat: vec![vec![-1, 0], vec![0, 1]],
        h: vec![0, 0],
        u_box: UncertaintyBox::new(vec![q_frac(3, 2), q_frac(1, 2)], vec![q_frac(7, 2), q(2)]),
        objective: AffineObjective::zero(2),
        name: Some("recourse-regions".into()),
    }
}

/// Resolves `"simplex-units(3)"`, `"recourse-regions"`, `"cardinality-band(4)"`
/// and `"cardinality-band-affine(4)"`.
pub fn builtin_example(name: &str) -> Result<Instance> {
    let name = name.trim();
    let (base, arg) = match name.split_once('(') {
        Some((b, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| Error::InvalidArgument(format!("malformed builtin name {name:?}")))?;
            let n = inner
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidArgument(format!("malformed builtin size in {name:?}")))?;
            (b.trim(), Some(n))
        }
        None => (name, None),
    };
    let need = |arg: Option<usize>| {
        arg.ok_or_else(|| Error::InvalidArgument(format!("builtin {base:?} needs a size, e.g. {base}(3)")))
    };
    match base {
        "simplex-units" => Ok(simplex_units(need(arg)?)?.into()),
        "cardinality-band" => Ok(cardinality_band(need(arg)?)?.into()),
        "cardinality-band-affine" => Ok(cardinality_band_affine(need(arg)?)?.into()),
        "recourse-regions" => Ok(recourse_regions().into()),
        _ => Err(Error::InvalidArgument(format!("unknown builtin {name:?}"))),
    }
}
