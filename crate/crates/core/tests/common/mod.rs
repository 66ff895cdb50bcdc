//! Independent reference implementations and random instance builders shared
//! by the integration tests. Nothing here calls the search code under test.

#![allow(dead_code)]

use kadapt_core::instance::{
    AffineInstance, AffineObjective, Constraint, FiniteInstance, IntConstraint, Scenario, Sense, UncertaintyBox,
};
use kadapt_core::rational::{q, q_frac};
use kadapt_core::{CoverageSet, Value, YSpace, Q};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Smallest number of subsets covering `0..universe`, by trying every
/// selection in order of size.
pub fn subset_enumeration_cover(universe: usize, sets: &[Vec<usize>]) -> Option<usize> {
    let n = sets.len();
    let mut best: Option<usize> = None;
    for mask in 0u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if best.is_some_and(|b| b <= size) {
            continue;
        }
        let mut hit = vec![false; universe];
        for (i, s) in sets.iter().enumerate() {
            if mask >> i & 1 == 1 {
                for &v in s {
                    hit[v] = true;
                }
            }
        }
        if hit.iter().all(|&h| h) {
            best = Some(size);
        }
    }
    best
}

/// Rational evaluation of `|S_y ∩ uncovered|` over all of `Y`; first maximiser
/// in lexicographic order.
pub fn exhaustive_max_coverage(inst: &FiniteInstance, uncovered: &CoverageSet, v: &Q) -> (Vec<i64>, Vec<usize>) {
    let mut best: Option<(Vec<i64>, Vec<usize>)> = None;
    for y in inst.y_space.enumerate().unwrap() {
        let hit: Vec<usize> = uncovered
            .iter()
            .filter(|&j| {
                let sc = &inst.scenarios[j];
                sc.is_feasible(&y) && sc.objective_at(&y) <= *v
            })
            .collect();
        if best.as_ref().map_or(true, |(_, b)| hit.len() > b.len()) {
            best = Some((y, hit));
        }
    }
    best.unwrap()
}

/// `max_j min_{y feasible at j} c_j·y` by enumeration, `Infinite` if some
/// scenario has no feasible point.
pub fn exhaustive_v_star(inst: &FiniteInstance) -> Value {
    let ys = inst.y_space.enumerate().unwrap();
    inst.scenarios
        .iter()
        .map(|sc| {
            ys.iter()
                .filter(|y| sc.is_feasible(y))
                .map(|y| Value::Finite(sc.objective_at(y)))
                .min()
                .unwrap_or(Value::Infinite)
        })
        .max()
        .unwrap()
}

/// `max_j min_{policy feasible at j} c_j·y` by direct evaluation.
pub fn direct_evaluate(inst: &FiniteInstance, policies: &[Vec<i64>]) -> Value {
    inst.scenarios
        .iter()
        .map(|sc| {
            policies
                .iter()
                .filter(|y| sc.is_feasible(y))
                .map(|y| Value::Finite(sc.objective_at(y)))
                .min()
                .unwrap_or(Value::Infinite)
        })
        .max()
        .unwrap_or(Value::Infinite)
}

/// Random set system over `0..universe` whose union is the universe.
pub fn random_set_system(r: &mut ChaCha8Rng, universe: usize, count: usize) -> Vec<Vec<usize>> {
    let mut sets: Vec<Vec<usize>> = (0..count)
        .map(|_| (0..universe).filter(|_| r.gen_bool(0.3)).collect())
        .collect();
    for v in 0..universe {
        if !sets.iter().any(|s| s.contains(&v)) {
            let k = r.gen_range(0..count);
            sets[k].push(v);
            sets[k].sort();
        }
    }
    sets
}

fn small_q(r: &mut ChaCha8Rng, span: i64) -> Q {
    q_frac(r.gen_range(-span..=span), r.gen_range(1..=3))
}

/// Small finite instance over an integer box with mixed-sense scenario
/// constraints and an optional deterministic constraint. `|Y| ≤ 4^5`.
pub fn random_finite(seed: u64) -> FiniteInstance {
    let mut r = rng(seed);
    let n = r.gen_range(1..=5);
    let lower: Vec<i64> = (0..n).map(|_| r.gen_range(-1..=0)).collect();
    let upper: Vec<i64> = lower.iter().map(|&l| l + r.gen_range(0..=3)).collect();
    let mut y_space = YSpace::boxed(lower, upper);
    if r.gen_bool(0.3) {
        let row: Vec<i64> = (0..n).map(|_| r.gen_range(-1..=1)).collect();
        y_space = y_space.with_constraint(IntConstraint::new(row, Sense::Le, r.gen_range(0..=3)));
    }
    let t = r.gen_range(1..=8);
    let senses = [Sense::Ge, Sense::Le, Sense::Eq];
    let scenarios = (0..t)
        .map(|_| {
            let objective = (0..n).map(|_| small_q(&mut r, 6)).collect();
            let constraints = (0..r.gen_range(0..=2))
                .map(|_| {
                    let row = (0..n).map(|_| small_q(&mut r, 3)).collect();
                    let sense = *senses.choose(&mut r).unwrap();
                    Constraint::new(row, sense, small_q(&mut r, 4))
                })
                .collect();
            Scenario { objective, constraints }
        })
        .collect();
    FiniteInstance::new(y_space, scenarios).named(format!("random-finite({seed})"))
}

/// Random affine instance with `n_ξ = 2`, binary `Y` of dimension 2 or 3,
/// one or two rows and two first-stage points.
pub fn random_affine(seed: u64, fixed_recourse: bool, objective_uncertain: bool) -> AffineInstance {
    let mut r = rng(seed);
    let n_y = r.gen_range(2..=3);
    let m = r.gen_range(1..=2);
    let n_xi = 2;
    let mat = |rows: usize, cols: usize, span: i64, r: &mut ChaCha8Rng| -> Vec<Vec<i64>> {
        (0..rows)
            .map(|_| (0..cols).map(|_| r.gen_range(-span..=span)).collect())
            .collect()
    };
    let a = mat(m, 1, 1, &mut r);
    let ai = (0..n_xi).map(|_| mat(m, 1, 1, &mut r)).collect();
    let b = mat(m, n_y, 2, &mut r);
    let bi = (0..n_xi)
        .map(|_| if fixed_recourse { vec![vec![0; n_y]; m] } else { mat(m, n_y, 1, &mut r) })
        .collect();
    let h_mat = mat(m, n_xi, 2, &mut r);
    let h = (0..m).map(|_| r.gen_range(-3..=3)).collect();
    let lo: Vec<Q> = (0..n_xi).map(|_| q_frac(r.gen_range(-2..=1), 2)).collect();
    let hi: Vec<Q> = lo.iter().map(|l| l + q(r.gen_range(1..=3))).collect();
    let c = (0..n_y).map(|_| q(r.gen_range(-3..=3))).collect();
    let ci = if objective_uncertain {
        (0..n_xi).map(|_| (0..n_y).map(|_| q(r.gen_range(-2..=2))).collect()).collect()
    } else {
        Vec::new()
    };
    AffineInstance {
        n_x: 1,
        n_y,
        n_xi,
        m,
        x_points: vec![vec![0], vec![1]],
        y_space: YSpace::binary(n_y),
        a,
        ai,
        b,
        bi,
        h_mat,
        h,
        u_box: UncertaintyBox::new(lo, hi),
        objective: AffineObjective { c, ci },
        name: Some(format!("random-affine({seed})")),
    }
}
