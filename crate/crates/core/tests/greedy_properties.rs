mod common;

use kadapt_core::generate::{generate_knapsack, reduce_set_cover};
use kadapt_core::greedy::{greedy_min_k, max_coverage, within_guarantee};
use kadapt_core::oracle::{brute_force_min_k, evaluate_k_solution, two_stage_value};
use kadapt_core::{CoverageSet, Value};
use proptest::prelude::*;

use common::{exhaustive_max_coverage, random_finite, random_set_system, rng};

#[test]
fn greedy_guarantee_on_knapsacks() {
    for seed in 0..50u64 {
        let inst = generate_knapsack(3 + seed as usize % 10, 1 + (seed as usize * 7) % 30, seed).unwrap();
        let g = greedy_min_k(&inst).unwrap();
        let k = brute_force_min_k(&inst).unwrap().k_opt;
        assert!(g.k_lb <= k && k <= g.k_ub, "seed {seed}");
        assert!(within_guarantee(g.k_ub, k, inst.t), "seed {seed}");
        assert_eq!(
            evaluate_k_solution(&inst, &g.policies).unwrap(),
            Value::Finite(g.optimal_value.clone())
        );
    }
}

#[test]
fn max_coverage_on_set_cover_is_largest_subset() {
    let mut r = rng(77);
    for _ in 0..20 {
        let sets = random_set_system(&mut r, 8, 6);
        let inst = reduce_set_cover(8, &sets).unwrap();
        let v = two_stage_value(&inst).unwrap();
        let mc = max_coverage(&inst, &CoverageSet::full(8), &v).unwrap();
        assert_eq!(mc.opt_count, sets.iter().map(Vec::len).max().unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn max_coverage_matches_enumeration(seed in 0u64..100_000, mask in any::<u8>(), num in -40i64..40) {
        let inst = random_finite(seed);
        prop_assume!(!inst.y_space.enumerate().unwrap().is_empty());
        let uncovered = CoverageSet::from_indices(inst.t, (0..inst.t).filter(|j| mask >> j & 1 == 1));
        let v = kadapt_core::rational::q_frac(num, 3);
        let fast = max_coverage(&inst, &uncovered, &v).unwrap();
        let (y, hit) = exhaustive_max_coverage(&inst, &uncovered, &v);
        prop_assert_eq!(fast.y_star, y);
        prop_assert_eq!(fast.covered.indices(), hit);
    }

    #[test]
    fn greedy_is_deterministic_with_shrinking_steps(n in 2usize..9, t in 1usize..12, seed in 0u64..1000) {
        let inst = generate_knapsack(n, t, seed).unwrap();
        let a = greedy_min_k(&inst).unwrap();
        prop_assert_eq!(&a, &greedy_min_k(&inst).unwrap());
        prop_assert!(a.trace.windows(2).all(|w| w[0].newly_covered >= w[1].newly_covered));
        prop_assert_eq!(a.trace.last().unwrap().remaining, 0);
        prop_assert!(a.k_lb <= a.k_ub);
    }
}
