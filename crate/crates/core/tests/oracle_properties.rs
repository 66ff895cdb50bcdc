mod common;

use kadapt_core::generate::{builtin_example, cardinality_band, generate_knapsack, reduce_set_cover, simplex_units};
use kadapt_core::greedy::greedy_min_k;
use kadapt_core::oracle::{
    brute_force_min_k, brute_force_opt_k, coverage_set, evaluate_k_solution, solve_scenario, two_stage_value,
};
use kadapt_core::rational::{q, q_frac};
use kadapt_core::{CoverageSet, FiniteInstance, Value};
use proptest::prelude::*;

use common::{direct_evaluate, exhaustive_v_star, random_finite, subset_enumeration_cover};

fn knapsacks_25() -> Vec<FiniteInstance> {
    (0..25)
        .map(|s| generate_knapsack(4 + (s as usize % 7), 3 + (s as usize % 10), 500 + s).unwrap())
        .collect()
}

#[test]
fn opt_k_is_monotone_and_reaches_v_star() {
    let mut instances = knapsacks_25();
    instances.push(simplex_units(3).unwrap());
    instances.push(cardinality_band(4).unwrap());
    instances.push(reduce_set_cover(4, &[vec![0, 1], vec![2], vec![3], vec![2, 3]]).unwrap());
    for inst in &instances {
        let v_star = Value::Finite(two_stage_value(inst).unwrap());
        let k_opt = brute_force_min_k(inst).unwrap().k_opt;
        let mut prev = Value::Infinite;
        for k in 1..=k_opt + 1 {
            let v = brute_force_opt_k(inst, k).unwrap();
            assert!(v <= prev, "{:?}: opt({k}) = {v} > {prev}", inst.name);
            assert!(v >= v_star);
            assert_eq!(v == v_star, k >= k_opt, "{:?} k={k}", inst.name);
            prev = v;
        }
    }
}

#[test]
fn builtin_values() {
    let s3 = simplex_units(3).unwrap();
    assert_eq!(brute_force_opt_k(&s3, 1).unwrap(), Value::Finite(q(1)));
    assert_eq!(brute_force_opt_k(&s3, 2).unwrap(), Value::Finite(q_frac(1, 2)));
    assert_eq!(brute_force_opt_k(&s3, 3).unwrap(), Value::Finite(q_frac(1, 3)));
    let band = cardinality_band(4).unwrap();
    assert_eq!(brute_force_opt_k(&band, 1).unwrap(), Value::Infinite);
    assert_eq!(two_stage_value(&band).unwrap(), q(0));
    assert_eq!(brute_force_min_k(&band).unwrap().k_opt, 4);
    // the pair scenario {1,2} is answered by e_3 at cost 0
    let j = (0..s3.t)
        .find(|&j| s3.scenarios[j].objective == vec![q_frac(1, 2), q_frac(1, 2), q(0)])
        .unwrap();
    let sol = solve_scenario(&s3, j).unwrap();
    assert_eq!((sol.value, sol.argmin), (Value::Finite(q(0)), Some(vec![0, 0, 1])));
}

#[test]
fn simplex_units_n_and_n_minus_one() {
    for n in 2..=5 {
        let inst = simplex_units(n).unwrap();
        let units: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        assert_eq!(evaluate_k_solution(&inst, &units).unwrap(), Value::Finite(q_frac(1, n as i64)));
        for skip in 0..n {
            let fewer: Vec<_> = units.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, u)| u.clone()).collect();
            assert_eq!(
                evaluate_k_solution(&inst, &fewer).unwrap(),
                Value::Finite(q_frac(1, n as i64 - 1))
            );
        }
    }
}

#[test]
fn witness_is_minimal() {
    for inst in knapsacks_25().iter().chain([simplex_units(3).unwrap(), cardinality_band(3).unwrap()].iter()) {
        let w = brute_force_min_k(inst).unwrap();
        let v_star = two_stage_value(inst).unwrap();
        assert_eq!(evaluate_k_solution(inst, &w.witness).unwrap(), Value::Finite(v_star.clone()));
        if w.k_opt > 4 {
            continue;
        }
        // every (k_opt − 1)-subset of distinct coverage sets misses a scenario
        let ys = inst.y_space.enumerate().unwrap();
        let mut sets: Vec<Vec<usize>> = ys
            .iter()
            .map(|y| coverage_set(inst, y, &Value::Finite(v_star.clone())).unwrap().indices())
            .filter(|s| !s.is_empty())
            .collect();
        sets.sort();
        sets.dedup();
        if sets.len() <= 20 {
            assert_eq!(subset_enumeration_cover(inst.t, &sets), Some(w.k_opt), "{:?}", inst.name);
        }
    }
}

#[test]
fn set_cover_reduction_evaluates_to_minus_one_iff_member() {
    let sets = vec![vec![0, 2], vec![1], vec![1, 2, 3]];
    let inst = reduce_set_cover(4, &sets).unwrap();
    for s in &sets {
        let y: Vec<i64> = (0..4).map(|v| i64::from(s.contains(&v))).collect();
        for v in 0..4 {
            let val = inst.scenarios[v].objective_at(&y);
            assert_eq!(val == q(-1), s.contains(&v));
        }
    }
    let tiny = reduce_set_cover(1, &[vec![0]]).unwrap();
    let w = brute_force_min_k(&tiny).unwrap();
    assert_eq!((w.k_opt, w.v_star), (1, q(-1)));
    let two = reduce_set_cover(2, &[vec![0], vec![1], vec![0, 1]]).unwrap();
    assert_eq!(brute_force_min_k(&two).unwrap().witness, vec![vec![1, 1]]);
    let three = reduce_set_cover(3, &[vec![0, 1], vec![2]]).unwrap();
    assert_eq!(brute_force_min_k(&three).unwrap().k_opt, 2);
    assert!(reduce_set_cover(3, &[vec![0, 1]]).is_err());
}

#[test]
fn greedy_bounds_on_builtins() {
    for name in ["simplex-units(3)", "cardinality-band(4)"] {
        let inst = builtin_example(name).unwrap();
        let f = inst.as_finite().unwrap();
        let g = greedy_min_k(f).unwrap();
        let k = brute_force_min_k(f).unwrap().k_opt;
        assert!(g.k_lb <= k && k <= g.k_ub);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn v_star_matches_enumeration(seed in 0u64..10_000) {
        let inst = random_finite(seed);
        match exhaustive_v_star(&inst) {
            Value::Finite(v) => prop_assert_eq!(two_stage_value(&inst).unwrap(), v),
            Value::Infinite => prop_assert!(two_stage_value(&inst).is_err()),
        }
    }

    #[test]
    fn coverage_grows_with_threshold(seed in 0u64..10_000, lo in -30i64..30, gap in 0i64..30) {
        let inst = random_finite(seed);
        let ys = inst.y_space.enumerate().unwrap();
        prop_assume!(!ys.is_empty());
        let y = &ys[seed as usize % ys.len()];
        let small = coverage_set(&inst, y, &Value::Finite(q_frac(lo, 2))).unwrap();
        let large = coverage_set(&inst, y, &Value::Finite(q_frac(lo + gap, 2))).unwrap();
        let all = coverage_set(&inst, y, &Value::Infinite).unwrap();
        prop_assert!(small.is_subset(&large));
        prop_assert!(large.is_subset(&all));
    }

    #[test]
    fn evaluation_hits_v_star_iff_coverage_union_is_full(seed in 0u64..10_000, picks in proptest::collection::vec(0usize..64, 0..4)) {
        let inst = generate_knapsack(2 + seed as usize % 7, 1 + seed as usize % 6, seed).unwrap();
        let ys = inst.y_space.enumerate().unwrap();
        let policies: Vec<Vec<i64>> = picks.iter().map(|&p| ys[p % ys.len()].clone()).collect();
        let v_star = Value::Finite(two_stage_value(&inst).unwrap());
        let mut union = CoverageSet::empty(inst.t);
        for y in &policies {
            union.union_with(&coverage_set(&inst, y, &v_star).unwrap());
        }
        let value = evaluate_k_solution(&inst, &policies).unwrap();
        prop_assert_eq!(&value, &direct_evaluate(&inst, &policies));
        prop_assert_eq!(value == v_star, union.count() == inst.t);
    }
}
