//! Integer-compiled scenarios and the depth-first branch-and-bound engines
//! shared by the per-scenario solver and the max-coverage subproblem.
//!
//! Every rational row is scaled by the lcm of its denominators and
//! normalised to `coeffs · y ≥ rhs` over `i128`. An objective threshold
//! `c·y ≤ v` becomes `(−L c)·y ≥ −⌊L v⌋`, which is exact because `L c·y` is
//! integral.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::instance::{Constraint, IntConstraint, Scenario, Sense, YSpace};
use crate::rational::{floor_to_bigint, lcm_of_denominators, Q, Value};

#[derive(Clone, Debug)]
pub(crate) struct IntRow {
    pub coeffs: Vec<i128>,
    pub rhs: i128,
}

impl IntRow {
    fn lhs(&self, y: &[i64]) -> i128 {
        self.coeffs.iter().zip(y).map(|(&c, &v)| c * v as i128).sum()
    }

    pub fn holds(&self, y: &[i64]) -> bool {
        self.lhs(y) >= self.rhs
    }
}

fn to_i128(v: &BigInt) -> Result<i128> {
    v.to_i128().ok_or(Error::Overflow("compiling rational data to integers"))
}

fn scaled(values: &[Q], rhs: &Q) -> Result<(Vec<i128>, i128)> {
    let l = lcm_of_denominators(values.iter().chain(std::iter::once(rhs)));
    let lq = Q::from_integer(l);
    let coeffs = values
        .iter()
        .map(|v| to_i128(&(v * &lq).to_integer()))
        .collect::<Result<Vec<_>>>()?;
    let rhs = to_i128(&(rhs * &lq).to_integer())?;
    Ok((coeffs, rhs))
}

fn push_normalised(out: &mut Vec<IntRow>, coeffs: Vec<i128>, sense: Sense, rhs: i128) {
    let neg = |c: &[i128]| c.iter().map(|v| -v).collect::<Vec<_>>();
    match sense {
        Sense::Ge => out.push(IntRow { coeffs, rhs }),
        Sense::Le => out.push(IntRow {
            coeffs: neg(&coeffs),
            rhs: -rhs,
        }),
        Sense::Eq => {
            out.push(IntRow {
                coeffs: neg(&coeffs),
                rhs: -rhs,
            });
            out.push(IntRow { coeffs, rhs });
        }
    }
}

pub(crate) fn compile_constraint(c: &Constraint, out: &mut Vec<IntRow>) -> Result<()> {
    let (coeffs, rhs) = scaled(&c.row, &c.rhs)?;
    push_normalised(out, coeffs, c.sense, rhs);
    Ok(())
}

pub(crate) fn compile_int_constraint(c: &IntConstraint, out: &mut Vec<IntRow>) {
    let coeffs = c.row.iter().map(|&v| v as i128).collect();
    push_normalised(out, coeffs, c.sense, c.rhs as i128);
}

#[derive(Clone, Debug)]
pub(crate) struct CompiledScenario {
    /// `L · c_j`
    pub objective: Vec<i128>,
    /// `L > 0`
    pub scale: i128,
    pub rows: Vec<IntRow>,
}

impl CompiledScenario {
    pub fn new(s: &Scenario) -> Result<Self> {
        let l = lcm_of_denominators(s.objective.iter());
        let lq = Q::from_integer(l.clone());
        let objective = s
            .objective
            .iter()
            .map(|v| to_i128(&(v * &lq).to_integer()))
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::new();
        for c in &s.constraints {
            compile_constraint(c, &mut rows)?;
        }
        Ok(Self {
            objective,
            scale: to_i128(&l)?,
            rows,
        })
    }

    pub fn is_feasible(&self, y: &[i64]) -> bool {
        self.rows.iter().all(|r| r.holds(y))
    }

    pub fn scaled_objective(&self, y: &[i64]) -> i128 {
        self.objective.iter().zip(y).map(|(&c, &v)| c * v as i128).sum()
    }

    pub fn value_of_scaled(&self, v: i128) -> Q {
        Q::new(BigInt::from(v), BigInt::from(self.scale))
    }

    /// Largest integer `θ` with `L c·y ≤ θ ⇔ c·y ≤ v`; `None` for `v = +∞`.
    pub fn threshold(&self, v: &Value) -> Option<i128> {
        let v = v.as_finite()?;
        let t = floor_to_bigint(&(v * Q::from_integer(BigInt::from(self.scale))));
        Some(t.to_i128().unwrap_or(if t.is_positive() { i128::MAX } else { i128::MIN }))
    }

    pub fn covers(&self, y: &[i64], threshold: Option<i128>) -> bool {
        threshold.is_none_or(|th| self.scaled_objective(y) <= th) && self.is_feasible(y)
    }
}

/// Box part of `Y` plus its deterministic rows, ready for branching.
pub(crate) struct BoxSpace {
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
    pub det: Vec<IntRow>,
}

impl BoxSpace {
    pub fn new(y: &YSpace) -> Self {
        let mut det = Vec::new();
        for c in &y.constraints {
            compile_int_constraint(c, &mut det);
        }
        Self {
            lower: y.lower.clone(),
            upper: y.upper.clone(),
            det,
        }
    }

    fn n(&self) -> usize {
        self.lower.len()
    }

    /// `suffix[i] = Σ_{k ≥ i} max_{y_k ∈ [lo_k, hi_k]} c_k y_k`.
    fn suffix_max(&self, coeffs: &[i128]) -> Vec<i128> {
        let n = self.n();
        let mut s = vec![0i128; n + 1];
        for k in (0..n).rev() {
            let a = coeffs[k] * self.lower[k] as i128;
            let b = coeffs[k] * self.upper[k] as i128;
            s[k] = s[k + 1] + a.max(b);
        }
        s
    }

    fn suffix_min(&self, coeffs: &[i128]) -> Vec<i128> {
        let n = self.n();
        let mut s = vec![0i128; n + 1];
        for k in (0..n).rev() {
            let a = coeffs[k] * self.lower[k] as i128;
            let b = coeffs[k] * self.upper[k] as i128;
            s[k] = s[k + 1] + a.min(b);
        }
        s
    }
}

/// A row with its running partial sum and optimistic completion bound.
struct Tracked {
    coeffs: Vec<i128>,
    rhs: i128,
    suffix_max: Vec<i128>,
    sum: i128,
}

impl Tracked {
    fn new(space: &BoxSpace, row: &IntRow) -> Self {
        Self {
            suffix_max: space.suffix_max(&row.coeffs),
            coeffs: row.coeffs.clone(),
            rhs: row.rhs,
            sum: 0,
        }
    }

    #[inline]
    fn satisfiable(&self, depth: usize) -> bool {
        self.sum + self.suffix_max[depth] >= self.rhs
    }
}

/// Lexicographically smallest minimiser of `c_j · y` over `y ∈ Y` feasible for
/// scenario `j`, as `(L·value, y)`; `None` when no such `y` exists.
pub(crate) fn minimize_scenario(y: &YSpace, sc: &CompiledScenario) -> Result<Option<(i128, Vec<i64>)>> {
    if y.is_explicit() {
        let mut best: Option<(i128, Vec<i64>)> = None;
        for p in y.enumerate()? {
            if !sc.is_feasible(&p) {
                continue;
            }
            let v = sc.scaled_objective(&p);
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, p));
            }
        }
        return Ok(best);
    }
    let space = BoxSpace::new(y);
    if space.lower.iter().zip(&space.upper).any(|(l, h)| l > h) {
        return Ok(None);
    }
    let mut rows: Vec<Tracked> = space
        .det
        .iter()
        .chain(&sc.rows)
        .map(|r| Tracked::new(&space, r))
        .collect();
    let obj_min = space.suffix_min(&sc.objective);
    let mut search = MinSearch {
        space: &space,
        objective: &sc.objective,
        obj_min,
        obj_sum: 0,
        y: space.lower.clone(),
        best: None,
    };
    search.dfs(0, &mut rows);
    Ok(search.best)
}

struct MinSearch<'a> {
    space: &'a BoxSpace,
    objective: &'a [i128],
    obj_min: Vec<i128>,
    obj_sum: i128,
    y: Vec<i64>,
    best: Option<(i128, Vec<i64>)>,
}

impl MinSearch<'_> {
    fn dfs(&mut self, depth: usize, rows: &mut [Tracked]) {
        if !rows.iter().all(|r| r.satisfiable(depth)) {
            return;
        }
        let bound = self.obj_sum + self.obj_min[depth];
        if let Some((b, _)) = &self.best {
            if bound >= *b {
                return;
            }
        }
        if depth == self.space.n() {
            self.best = Some((self.obj_sum, self.y.clone()));
            return;
        }
        for v in self.space.lower[depth]..=self.space.upper[depth] {
            self.y[depth] = v;
            let v = v as i128;
            for r in rows.iter_mut() {
                r.sum += r.coeffs[depth] * v;
            }
            self.obj_sum += self.objective[depth] * v;
            self.dfs(depth + 1, rows);
            self.obj_sum -= self.objective[depth] * v;
            for r in rows.iter_mut() {
                r.sum -= r.coeffs[depth] * v;
            }
        }
        self.y[depth] = self.space.lower[depth];
    }
}

/// Maximum-coverage subproblem: the lexicographically smallest `y ∈ Y`
/// maximising the number of `targets` it covers (feasible and within the
/// scenario's threshold). Returns `None` only when `Y` is empty.
pub(crate) fn max_coverage_search(
    y: &YSpace,
    scenarios: &[CompiledScenario],
    thresholds: &[Option<i128>],
    targets: &[usize],
) -> Result<Option<(Vec<i64>, Vec<usize>)>> {
    if y.is_explicit() {
        let mut best: Option<(Vec<i64>, Vec<usize>)> = None;
        for p in y.enumerate()? {
            let covered: Vec<usize> = targets
                .iter()
                .copied()
                .filter(|&j| scenarios[j].covers(&p, thresholds[j]))
                .collect();
            if best.as_ref().is_none_or(|(_, c)| covered.len() > c.len()) {
                best = Some((p, covered));
            }
        }
        return Ok(best);
    }
    let space = BoxSpace::new(y);
    if space.lower.iter().zip(&space.upper).any(|(l, h)| l > h) {
        return Ok(None);
    }
    let mut rows = Vec::new();
    let mut groups = Vec::with_capacity(targets.len());
    for &j in targets {
        let sc = &scenarios[j];
        let start = rows.len();
        for r in &sc.rows {
            rows.push(Tracked::new(&space, r));
        }
        if let Some(th) = thresholds[j] {
            let row = IntRow {
                coeffs: sc.objective.iter().map(|c| -c).collect(),
                rhs: th.checked_neg().unwrap_or(i128::MAX),
            };
            rows.push(Tracked::new(&space, &row));
        }
        groups.push(Group {
            scenario: j,
            rows: start..rows.len(),
        });
    }
    let det: Vec<Tracked> = space.det.iter().map(|r| Tracked::new(&space, r)).collect();
    let all: Vec<usize> = (0..groups.len()).collect();
    let mut search = CoverSearch {
        space: &space,
        rows,
        det,
        groups,
        y: space.lower.clone(),
        best: None,
    };
    search.dfs(0, &all);
    Ok(search.best.map(|(y, covered)| {
        let covered = covered.into_iter().map(|g| search.groups[g].scenario).collect();
        (y, covered)
    }))
}

struct Group {
    scenario: usize,
    rows: std::ops::Range<usize>,
}

struct CoverSearch<'a> {
    space: &'a BoxSpace,
    rows: Vec<Tracked>,
    det: Vec<Tracked>,
    groups: Vec<Group>,
    y: Vec<i64>,
    best: Option<(Vec<i64>, Vec<usize>)>,
}

impl CoverSearch<'_> {
    fn winnable(&self, g: usize, depth: usize) -> bool {
        self.rows[self.groups[g].rows.clone()]
            .iter()
            .all(|r| r.satisfiable(depth))
    }

    fn dfs(&mut self, depth: usize, alive: &[usize]) {
        if !self.det.iter().all(|r| r.satisfiable(depth)) {
            return;
        }
        let alive: Vec<usize> = alive
            .iter()
            .copied()
            .filter(|&g| self.winnable(g, depth))
            .collect();
        if let Some((_, c)) = &self.best {
            if alive.len() <= c.len() {
                return;
            }
        }
        if depth == self.space.n() {
            // at a leaf "winnable" means covered
            self.best = Some((self.y.clone(), alive));
            return;
        }
        for v in self.space.lower[depth]..=self.space.upper[depth] {
            self.y[depth] = v;
            let v = v as i128;
            self.shift(depth, v, &alive);
            self.dfs(depth + 1, &alive);
            self.shift(depth, -v, &alive);
        }
        self.y[depth] = self.space.lower[depth];
    }

    fn shift(&mut self, depth: usize, v: i128, alive: &[usize]) {
        for r in self.det.iter_mut() {
            r.sum += r.coeffs[depth] * v;
        }
        for &g in alive {
            for r in &mut self.rows[self.groups[g].rows.clone()] {
                r.sum += r.coeffs[depth] * v;
            }
        }
    }
}
