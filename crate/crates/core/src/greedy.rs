//! Greedy approximation of the minimal `k` for finite uncertainty sets.
//!
//! Each round solves the max-coverage subproblem
//!
//! ```text
//! opt(U') = max Σ_{ξ∈U'} z_ξ
//!     s.t. g(y, ξ) ≤ v* + M(1 − z_ξ)       ∀ ξ ∈ U'
//!          B(ξ) y ≥ h(ξ) − M(1 − z_ξ)       ∀ ξ ∈ U'
//!          y ∈ Y, z ∈ {0,1}^{U'}
//! ```
//!
//! exactly, by branch and bound over the integer box of `Y` instead of as a
//! big-M program. A valid `M` would be the largest `|c_j·y| + |v*|` over `Y`
//! and scenarios, plus per-row slack bounds `max_Y |h_r − b_r·y|`; an
//! undersized `M` silently cuts off optimal `y`, which the combinatorial
//! search cannot do. A scenario stays "winnable" at a node while interval
//! bounds over the unfixed coordinates still allow `c_j·y ≤ v*` and every
//! constraint row; the bound is the number of winnable uncovered scenarios.

use serde::Serialize;

use crate::coverage::CoverageSet;
use crate::error::{Error, Result};
use crate::instance::FiniteInstance;
use crate::oracle::{compile, two_stage_value};
use crate::rational::{Q, Value};
use crate::search::{max_coverage_search, CompiledScenario};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MaxCoverage {
    pub y_star: Vec<i64>,
    /// `S_{y*} ∩ U'`.
    pub covered: CoverageSet,
    pub opt_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub policy: Vec<i64>,
    pub newly_covered: usize,
    pub remaining: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinKResult {
    pub k_lb: usize,
    pub k_ub: usize,
    pub policies: Vec<Vec<i64>>,
    pub trace: Vec<TraceStep>,
    #[serde(with = "crate::rational::serde_q::scalar")]
    pub optimal_value: Q,
    /// `opt(U)` of the first round.
    pub first_coverage: usize,
}

fn max_coverage_compiled(
    inst: &FiniteInstance,
    compiled: &[CompiledScenario],
    thresholds: &[Option<i128>],
    uncovered: &CoverageSet,
) -> Result<MaxCoverage> {
    let targets = uncovered.indices();
    let (y_star, hit) = max_coverage_search(&inst.y_space, compiled, thresholds, &targets)?
        .ok_or_else(|| Error::InvalidInstance("second-stage set Y is empty".into()))?;
    let covered = CoverageSet::from_indices(inst.t, hit);
    Ok(MaxCoverage {
        y_star,
        opt_count: covered.count(),
        covered,
    })
}

/// `y* ∈ Y` maximising `|S_y ∩ U'|` at threshold `v_star`, lexicographically
/// smallest among maximisers. `opt_count = 0` is a valid answer.
pub fn max_coverage(inst: &FiniteInstance, uncovered: &CoverageSet, v_star: &Q) -> Result<MaxCoverage> {
    if uncovered.universe() != inst.t {
        return Err(Error::InvalidArgument(format!(
            "coverage set width {} does not match t = {}",
            uncovered.universe(),
            inst.t
        )));
    }
    let compiled = compile(inst)?;
    let v = Value::Finite(v_star.clone());
    let thresholds: Vec<_> = compiled.iter().map(|sc| sc.threshold(&v)).collect();
    max_coverage_compiled(inst, &compiled, &thresholds, uncovered)
}

/// Greedy set cover over the coverage sets at `v*`.
///
/// Returns `k_ub = |policies|` and `k_lb = ⌈t / opt(U)⌉` from the first round.
pub fn greedy_min_k(inst: &FiniteInstance) -> Result<MinKResult> {
    let v_star = two_stage_value(inst)?;
    let compiled = compile(inst)?;
    let v = Value::Finite(v_star.clone());
    let thresholds: Vec<_> = compiled.iter().map(|sc| sc.threshold(&v)).collect();

    let mut uncovered = CoverageSet::full(inst.t);
    let mut policies = Vec::new();
    let mut trace = Vec::new();
    let mut first_coverage = None;
    while !uncovered.is_empty() {
        let step = max_coverage_compiled(inst, &compiled, &thresholds, &uncovered)?;
        if step.opt_count == 0 {
            return Err(Error::Uncoverable {
                scenarios: uncovered.indices(),
            });
        }
        first_coverage.get_or_insert(step.opt_count);
        uncovered.difference_with(&step.covered);
        trace.push(TraceStep {
            policy: step.y_star.clone(),
            newly_covered: step.opt_count,
            remaining: uncovered.count(),
        });
        policies.push(step.y_star);
    }
    let first_coverage = first_coverage.expect("t >= 1 guarantees one round");
    Ok(MinKResult {
        k_lb: inst.t.div_ceil(first_coverage),
        k_ub: policies.len(),
        policies,
        trace,
        optimal_value: v_star,
        first_coverage,
    })
}

/// `1 + ln t`, the greedy set-cover approximation factor.
pub fn guarantee_ratio(t: usize) -> f64 {
    assert!(t >= 1, "t must be at least 1");
    1.0 + (t as f64).ln()
}

/// Slack used when comparing against [`guarantee_ratio`].
pub const GUARANTEE_SLACK: f64 = 1e-12;

/// `k_ub ≤ (1 + ln t)·k_opt` with [`GUARANTEE_SLACK`].
pub fn within_guarantee(k_ub: usize, k_opt: usize, t: usize) -> bool {
    k_ub as f64 <= guarantee_ratio(t) * k_opt as f64 + GUARANTEE_SLACK
}
