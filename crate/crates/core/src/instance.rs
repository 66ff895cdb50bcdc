//! Instance representations: finite-scenario min-max-min instances and
//! affine constraint systems over a box uncertainty set, their JSON schema,
//! and structural validation.

use std::fmt;
use std::fs;
use std::path::Path;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{serde_q, Q};

/// Upper limit on the number of points any enumeration of `Y` may produce.
pub const ENUMERATION_GUARD: u64 = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
}

impl Sense {
    pub fn holds<T: PartialOrd>(self, lhs: &T, rhs: &T) -> bool {
        match self {
            Sense::Ge => lhs >= rhs,
            Sense::Le => lhs <= rhs,
            Sense::Eq => lhs == rhs,
        }
    }
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Ge => ">=",
            Sense::Le => "<=",
            Sense::Eq => "=",
        })
    }
}

/// Integer linear constraint `row · y (sense) rhs` that holds in every scenario.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntConstraint {
    pub row: Vec<i64>,
    pub sense: Sense,
    pub rhs: i64,
}

impl IntConstraint {
    pub fn new(row: Vec<i64>, sense: Sense, rhs: i64) -> Self {
        Self { row, sense, rhs }
    }

    pub fn holds(&self, y: &[i64]) -> bool {
        let lhs: i128 = self
            .row
            .iter()
            .zip(y)
            .map(|(&a, &v)| a as i128 * v as i128)
            .sum();
        self.sense.holds(&lhs, &(self.rhs as i128))
    }
}

/// Rational linear constraint `row · v (sense) rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    #[serde(with = "serde_q::vec")]
    pub row: Vec<Q>,
    pub sense: Sense,
    #[serde(with = "serde_q::scalar")]
    pub rhs: Q,
}

impl Constraint {
    pub fn new(row: Vec<Q>, sense: Sense, rhs: Q) -> Self {
        Self { row, sense, rhs }
    }

    pub fn lhs_int(&self, y: &[i64]) -> Q {
        self.row
            .iter()
            .zip(y)
            .map(|(a, &v)| a * Q::from_integer(v.into()))
            .sum()
    }

    pub fn holds_int(&self, y: &[i64]) -> bool {
        self.sense.holds(&self.lhs_int(y), &self.rhs)
    }

    pub fn holds(&self, v: &[Q]) -> bool {
        let lhs: Q = self.row.iter().zip(v).map(|(a, x)| a * x).sum();
        self.sense.holds(&lhs, &self.rhs)
    }
}

/// The bounded integer second-stage set `Y`.
///
/// Either the integer points of `[lower, upper]` satisfying `constraints`, or,
/// when `explicit` is present, the listed points (restricted to the box and
/// the constraints). The explicit mode represents arbitrary finite families
/// such as the indicator vectors of a set system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct YSpace {
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
    #[serde(default)]
    pub constraints: Vec<IntConstraint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit: Option<Vec<Vec<i64>>>,
}

impl YSpace {
    pub fn boxed(lower: Vec<i64>, upper: Vec<i64>) -> Self {
        Self {
            lower,
            upper,
            constraints: Vec::new(),
            explicit: None,
        }
    }

    pub fn binary(n: usize) -> Self {
        Self::boxed(vec![0; n], vec![1; n])
    }

    pub fn with_constraint(mut self, c: IntConstraint) -> Self {
        self.constraints.push(c);
        self
    }

    pub fn explicit(lower: Vec<i64>, upper: Vec<i64>, points: Vec<Vec<i64>>) -> Self {
        Self {
            lower,
            upper,
            constraints: Vec::new(),
            explicit: Some(points),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn is_explicit(&self) -> bool {
        self.explicit.is_some()
    }

    pub fn in_box(&self, y: &[i64]) -> bool {
        y.len() == self.dim()
            && y
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    pub fn contains(&self, y: &[i64]) -> bool {
        if !self.in_box(y) || !self.constraints.iter().all(|c| c.holds(y)) {
            return false;
        }
        match &self.explicit {
            Some(points) => points.iter().any(|p| p.as_slice() == y),
            None => true,
        }
    }

    /// Number of integer points in the box `∏(upper_i − lower_i + 1)`.
    pub fn box_size(&self) -> BigUint {
        self.lower
            .iter()
            .zip(&self.upper)
            .fold(BigUint::one(), |acc, (lo, hi)| {
                if hi < lo {
                    BigUint::zero()
                } else {
                    acc * BigUint::from((hi - lo) as u64 + 1)
                }
            })
    }

    /// Count of raw candidates an enumeration has to visit.
    pub fn candidate_count(&self) -> BigUint {
        match &self.explicit {
            Some(points) => BigUint::from(points.len()),
            None => self.box_size(),
        }
    }

    /// All members of `Y` in ascending lexicographic order, without duplicates.
    pub fn enumerate(&self) -> Result<Vec<Vec<i64>>> {
        self.enumerate_with_guard(ENUMERATION_GUARD)
    }

    pub fn enumerate_with_guard(&self, guard: u64) -> Result<Vec<Vec<i64>>> {
        if self.candidate_count() > BigUint::from(guard) {
            return Err(Error::GuardExceeded(format!(
                "second-stage set has {} candidate points (limit {guard})",
                self.candidate_count()
            )));
        }
        if let Some(points) = &self.explicit {
            let mut out: Vec<Vec<i64>> = points
                .iter()
                .filter(|p| self.in_box(p) && self.constraints.iter().all(|c| c.holds(p)))
                .cloned()
                .collect();
            out.sort();
            out.dedup();
            return Ok(out);
        }
        let mut out = Vec::new();
        if self.lower.iter().zip(&self.upper).any(|(lo, hi)| lo > hi) {
            return Ok(out);
        }
        let n = self.dim();
        let mut y = self.lower.clone();
        loop {
            if self.constraints.iter().all(|c| c.holds(&y)) {
                out.push(y.clone());
            }
            // odometer, last coordinate fastest => lexicographic order
            let mut i = n;
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                if y[i] < self.upper[i] {
                    y[i] += 1;
                    break;
                }
                y[i] = self.lower[i];
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    /// Linear objective `c_j`, i.e. `g(y, ξ^j) = c_j · y`.
    #[serde(with = "serde_q::vec")]
    pub objective: Vec<Q>,
    /// Uncertain constraints `B(ξ^j) y ≥ h(ξ^j)` at this scenario.
    #[serde(default)]
    pub constraints: Vec<Constraint>,
}

impl Scenario {
    pub fn objective_at(&self, y: &[i64]) -> Q {
        self.objective
            .iter()
            .zip(y)
            .map(|(c, &v)| c * Q::from_integer(v.into()))
            .sum()
    }

    pub fn is_feasible(&self, y: &[i64]) -> bool {
        self.constraints.iter().all(|c| c.holds_int(y))
    }
}

/// Min-max-min instance over `t` explicit scenarios (minimisation).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteInstance {
    pub n_y: usize,
    pub t: usize,
    pub y_space: YSpace,
    pub scenarios: Vec<Scenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl FiniteInstance {
    pub fn new(y_space: YSpace, scenarios: Vec<Scenario>) -> Self {
        Self {
            n_y: y_space.dim(),
            t: scenarios.len(),
            y_space,
            scenarios,
            name: None,
            seed: None,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }
}

/// Box uncertainty set with optional extra linear constraints on `ξ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UncertaintyBox {
    #[serde(with = "serde_q::vec")]
    pub lower: Vec<Q>,
    #[serde(with = "serde_q::vec")]
    pub upper: Vec<Q>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<Constraint>,
}

impl UncertaintyBox {
    pub fn new(lower: Vec<Q>, upper: Vec<Q>) -> Self {
        Self {
            lower,
            upper,
            constraints: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, xi: &[Q]) -> bool {
        xi.len() == self.dim()
            && xi
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| lo <= v && v <= hi)
            && self.constraints.iter().all(|c| c.holds(xi))
    }
}

/// Objective `g(y, ξ) = (c + Σ_i ξ_i c^i) · y`, affine (hence concave) in ξ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineObjective {
    #[serde(with = "serde_q::vec")]
    pub c: Vec<Q>,
    #[serde(rename = "Ci", default, with = "serde_q::vecvec")]
    pub ci: Vec<Vec<Q>>,
}

impl AffineObjective {
    pub fn zero(n_y: usize) -> Self {
        Self {
            c: vec![Q::zero(); n_y],
            ci: Vec::new(),
        }
    }

    pub fn depends_on_xi(&self) -> bool {
        self.ci.iter().flatten().any(|v| !v.is_zero())
    }

    pub fn coefficients_at(&self, xi: &[Q]) -> Vec<Q> {
        let mut out = self.c.clone();
        for (i, ci) in self.ci.iter().enumerate() {
            for (o, v) in out.iter_mut().zip(ci) {
                *o += &xi[i] * v;
            }
        }
        out
    }
}

/// Constraint system affine in ξ:
/// `A(ξ) x + B(ξ) y ≥ h + H ξ` with `A(ξ) = A + Σ A^i ξ_i`, `B(ξ) = B + Σ B^i ξ_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineInstance {
    pub n_x: usize,
    pub n_y: usize,
    pub n_xi: usize,
    pub m: usize,
    #[serde(rename = "X")]
    pub x_points: Vec<Vec<i64>>,
    pub y_space: YSpace,
    #[serde(rename = "A")]
    pub a: Vec<Vec<i64>>,
    #[serde(rename = "Ai")]
    pub ai: Vec<Vec<Vec<i64>>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<i64>>,
    #[serde(rename = "Bi")]
    pub bi: Vec<Vec<Vec<i64>>>,
    #[serde(rename = "H")]
    pub h_mat: Vec<Vec<i64>>,
    pub h: Vec<i64>,
    #[serde(rename = "U_box")]
    pub u_box: UncertaintyBox,
    pub objective: AffineObjective,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

/// One row of the ξ-space form `a·ξ ≥ h` for fixed `(x, y)`, integer data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XiRow {
    pub normal: Vec<i64>,
    pub offset: i64,
}

impl XiRow {
    pub fn holds(&self, xi: &[Q]) -> bool {
        let lhs: Q = self
            .normal
            .iter()
            .zip(xi)
            .map(|(&a, v)| Q::from_integer(a.into()) * v)
            .sum();
        lhs >= Q::from_integer(self.offset.into())
    }
}

fn dot(row: &[i64], v: &[i64]) -> i64 {
    row.iter().zip(v).map(|(a, b)| a * b).sum()
}

impl AffineInstance {
    pub fn objective_depends_on_xi(&self) -> bool {
        self.objective.depends_on_xi()
    }

    pub fn is_fixed_recourse(&self) -> bool {
        self.bi.iter().flatten().flatten().all(|&v| v == 0)
    }

    /// Rows `Σ_i (A^i x + B^i y − H_i) ξ_i ≥ h − A x − B y` for a fixed pair.
    pub fn xi_rows(&self, x: &[i64], y: &[i64]) -> Vec<XiRow> {
        (0..self.m)
            .map(|l| {
                let normal = (0..self.n_xi)
                    .map(|i| dot(&self.ai[i][l], x) + dot(&self.bi[i][l], y) - self.h_mat[l][i])
                    .collect();
                let offset = self.h[l] - dot(&self.a[l], x) - dot(&self.b[l], y);
                XiRow { normal, offset }
            })
            .collect()
    }

    pub fn is_feasible_at(&self, x: &[i64], y: &[i64], xi: &[Q]) -> bool {
        self.xi_rows(x, y).iter().all(|r| r.holds(xi))
    }

    /// `(A(x)` column-wise`)`: the m×n_ξ matrix with columns `A^i x − H_i`.
    pub fn xi_matrix(&self, x: &[i64]) -> Vec<Vec<i64>> {
        (0..self.m)
            .map(|l| {
                (0..self.n_xi)
                    .map(|i| dot(&self.ai[i][l], x) - self.h_mat[l][i])
                    .collect()
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Instance {
    Finite(FiniteInstance),
    Affine(AffineInstance),
}

impl Instance {
    pub fn as_finite(&self) -> Option<&FiniteInstance> {
        match self {
            Instance::Finite(f) => Some(f),
            Instance::Affine(_) => None,
        }
    }

    pub fn as_affine(&self) -> Option<&AffineInstance> {
        match self {
            Instance::Affine(a) => Some(a),
            Instance::Finite(_) => None,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        match self {
            Instance::Finite(f) => validate_finite(f),
            Instance::Affine(a) => validate_affine(a),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization is infallible")
    }

    /// Parses a JSON document; errors name the offending field path.
    pub fn from_json(text: &str) -> Result<Instance> {
        let doc: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: ".".into(),
            message: e.to_string(),
        })?;
        // dispatch on "kind" by hand: an internally tagged enum would buffer
        // the body and lose the field path in error messages
        let kind = doc.get("kind").and_then(|k| k.as_str()).map(str::to_owned);
        fn typed<T: serde::de::DeserializeOwned>(doc: serde_json::Value) -> Result<T> {
            serde_path_to_error::deserialize(doc).map_err(|e| Error::Parse {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })
        }
        match kind.as_deref() {
            Some("finite") => typed(doc).map(Instance::Finite),
            Some("affine") => typed(doc).map(Instance::Affine),
            Some(other) => Err(Error::Parse {
                path: "kind".into(),
                message: format!("unknown instance kind {other:?} (expected \"finite\" or \"affine\")"),
            }),
            None => Err(Error::Parse {
                path: "kind".into(),
                message: "missing field `kind`".into(),
            }),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    /// Reads, parses and validates an instance file.
    pub fn load(path: impl AsRef<Path>) -> Result<Instance> {
        let text = fs::read_to_string(path)?;
        let inst = Self::from_json(&text)?;
        let report = inst.validate();
        if let Some(v) = report.violations.first() {
            return Err(Error::InvalidInstance(v.to_string()));
        }
        Ok(inst)
    }
}

impl From<FiniteInstance> for Instance {
    fn from(f: FiniteInstance) -> Self {
        Instance::Finite(f)
    }
}

impl From<AffineInstance> for Instance {
    fn from(a: AffineInstance) -> Self {
        Instance::Affine(a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    DimensionMismatch,
    Bounds,
    EmptyY,
    NoScenarios,
    CountMismatch,
    EmptyX,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, kind: ViolationKind, message: impl Into<String>) {
        self.violations.push(Violation {
            kind,
            message: message.into(),
        });
    }

    fn check_len(&mut self, what: &str, got: usize, want: usize) {
        if got != want {
            self.push(
                ViolationKind::DimensionMismatch,
                format!("{what} has length {got}, expected {want}"),
            );
        }
    }

    fn check_matrix(&mut self, what: &str, mat: &[Vec<i64>], rows: usize, cols: usize) {
        self.check_len(what, mat.len(), rows);
        for (l, row) in mat.iter().enumerate() {
            self.check_len(&format!("{what}[{l}]"), row.len(), cols);
        }
    }
}

fn validate_y_space(report: &mut ValidationReport, y: &YSpace, n_y: usize) {
    report.check_len("y_space.lower", y.lower.len(), n_y);
    report.check_len("y_space.upper", y.upper.len(), n_y);
    for (i, (lo, hi)) in y.lower.iter().zip(&y.upper).enumerate() {
        if lo > hi {
            report.push(
                ViolationKind::Bounds,
                format!("y_space bounds at coordinate {i}: lower {lo} > upper {hi}"),
            );
        }
    }
    for (k, c) in y.constraints.iter().enumerate() {
        report.check_len(&format!("y_space.constraints[{k}].row"), c.row.len(), n_y);
    }
    if let Some(points) = &y.explicit {
        for (k, p) in points.iter().enumerate() {
            report.check_len(&format!("y_space.explicit[{k}]"), p.len(), n_y);
        }
    }
}

fn check_y_nonempty(report: &mut ValidationReport, y: &YSpace) {
    if !report.is_valid() {
        return;
    }
    // only decidable cheaply under the enumeration guard
    if let Ok(points) = y.enumerate() {
        if points.is_empty() {
            report.push(ViolationKind::EmptyY, "second-stage set Y is empty");
        }
    }
}

pub fn validate_finite(inst: &FiniteInstance) -> ValidationReport {
    let mut r = ValidationReport::default();
    if inst.t == 0 || inst.scenarios.is_empty() {
        r.push(ViolationKind::NoScenarios, "instance has no scenarios (t = 0)");
    }
    if inst.t != inst.scenarios.len() {
        r.push(
            ViolationKind::CountMismatch,
            format!("t = {} but {} scenarios given", inst.t, inst.scenarios.len()),
        );
    }
    validate_y_space(&mut r, &inst.y_space, inst.n_y);
    for (j, s) in inst.scenarios.iter().enumerate() {
        r.check_len(&format!("scenarios[{j}].objective"), s.objective.len(), inst.n_y);
        for (k, c) in s.constraints.iter().enumerate() {
            r.check_len(&format!("scenarios[{j}].constraints[{k}].row"), c.row.len(), inst.n_y);
        }
    }
    check_y_nonempty(&mut r, &inst.y_space);
    r
}

pub fn validate_affine(inst: &AffineInstance) -> ValidationReport {
    let mut r = ValidationReport::default();
    if inst.x_points.is_empty() {
        r.push(ViolationKind::EmptyX, "first-stage set X is empty");
    }
    for (k, x) in inst.x_points.iter().enumerate() {
        r.check_len(&format!("X[{k}]"), x.len(), inst.n_x);
    }
    validate_y_space(&mut r, &inst.y_space, inst.n_y);
    r.check_matrix("A", &inst.a, inst.m, inst.n_x);
    r.check_len("Ai", inst.ai.len(), inst.n_xi);
    for (i, mat) in inst.ai.iter().enumerate() {
        r.check_matrix(&format!("Ai[{i}]"), mat, inst.m, inst.n_x);
    }
    r.check_matrix("B", &inst.b, inst.m, inst.n_y);
    r.check_len("Bi", inst.bi.len(), inst.n_xi);
    for (i, mat) in inst.bi.iter().enumerate() {
        r.check_matrix(&format!("Bi[{i}]"), mat, inst.m, inst.n_y);
    }
    r.check_matrix("H", &inst.h_mat, inst.m, inst.n_xi);
    r.check_len("h", inst.h.len(), inst.m);
    r.check_len("U_box.lower", inst.u_box.lower.len(), inst.n_xi);
    r.check_len("U_box.upper", inst.u_box.upper.len(), inst.n_xi);
    for (i, (lo, hi)) in inst.u_box.lower.iter().zip(&inst.u_box.upper).enumerate() {
        if lo > hi {
            r.push(
                ViolationKind::Bounds,
                format!("U_box bounds at coordinate {i}: lower > upper"),
            );
        }
    }
    for (k, c) in inst.u_box.constraints.iter().enumerate() {
        r.check_len(&format!("U_box.constraints[{k}].row"), c.row.len(), inst.n_xi);
    }
    r.check_len("objective.c", inst.objective.c.len(), inst.n_y);
    if !inst.objective.ci.is_empty() {
        r.check_len("objective.Ci", inst.objective.ci.len(), inst.n_xi);
        for (i, ci) in inst.objective.ci.iter().enumerate() {
            r.check_len(&format!("objective.Ci[{i}]"), ci.len(), inst.n_y);
        }
    }
    check_y_nonempty(&mut r, &inst.y_space);
    r
}
