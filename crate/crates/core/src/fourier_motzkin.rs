//! Exact Fourier–Motzkin elimination for small systems of strict and
//! non-strict linear inequalities over the rationals.
//!
//! Every inequality reads `coeffs · ξ ≥ rhs` (or `>` when `strict`). A system
//! is projected one variable at a time; the last projection is a list of
//! constant inequalities whose truth decides feasibility. Points are
//! recovered by back-substitution through the stored projections.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::rational::Q;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ineq {
    pub coeffs: Vec<Q>,
    pub rhs: Q,
    pub strict: bool,
}

impl Ineq {
    pub fn ge(coeffs: Vec<Q>, rhs: Q) -> Self {
        Self { coeffs, rhs, strict: false }
    }

    pub fn gt(coeffs: Vec<Q>, rhs: Q) -> Self {
        Self { coeffs, rhs, strict: true }
    }

    /// `coeffs · ξ ≤ rhs` (or `<`).
    pub fn le(coeffs: Vec<Q>, rhs: Q, strict: bool) -> Self {
        Self {
            coeffs: coeffs.into_iter().map(|c| -c).collect(),
            rhs: -rhs,
            strict,
        }
    }

    pub fn lhs(&self, point: &[Q]) -> Q {
        self.coeffs.iter().zip(point).map(|(a, v)| a * v).sum()
    }

    pub fn holds(&self, point: &[Q]) -> bool {
        let lhs = self.lhs(point);
        if self.strict {
            lhs > self.rhs
        } else {
            lhs >= self.rhs
        }
    }

    /// Same inequality with the sense flipped: `¬(a·ξ ≥ b)` is `a·ξ < b`.
    pub fn negated(&self) -> Self {
        Self::le(self.coeffs.clone(), self.rhs.clone(), !self.strict)
    }
}

/// Scales by `1/|first nonzero|`; zero rows are returned unchanged.
fn normalise(mut ineq: Ineq) -> Ineq {
    if let Some(lead) = ineq.coeffs.iter().find(|c| !c.is_zero()).map(|c| c.abs()) {
        if !lead.is_one() {
            for c in ineq.coeffs.iter_mut() {
                *c /= &lead;
            }
            ineq.rhs /= &lead;
        }
    }
    ineq
}

/// Drops constant rows and keeps only the tightest of parallel rows.
/// `None` if a constant row is violated.
fn reduce(rows: impl IntoIterator<Item = Ineq>) -> Option<Vec<Ineq>> {
    let mut best: BTreeMap<Vec<Q>, (Q, bool)> = BTreeMap::new();
    for row in rows {
        let row = normalise(row);
        if row.coeffs.iter().all(Zero::is_zero) {
            let ok = if row.strict {
                row.rhs.is_negative()
            } else {
                !row.rhs.is_positive()
            };
            if !ok {
                return None;
            }
            continue;
        }
        match best.get_mut(&row.coeffs) {
            Some((rhs, strict)) => {
                if row.rhs > *rhs || (row.rhs == *rhs && row.strict) {
                    *rhs = row.rhs;
                    *strict = row.strict;
                }
            }
            None => {
                best.insert(row.coeffs, (row.rhs, row.strict));
            }
        }
    }
    Some(
        best.into_iter()
            .map(|(coeffs, (rhs, strict))| Ineq { coeffs, rhs, strict })
            .collect(),
    )
}

/// One elimination step: rows of the system before variable `var` was removed.
struct Stage {
    var: usize,
    rows: Vec<Ineq>,
}

/// The projections of a system, ready for back-substitution.
struct Elimination {
    dim: usize,
    stages: Vec<Stage>,
}

fn eliminate(system: &[Ineq], dim: usize) -> Option<Elimination> {
    for row in system {
        assert_eq!(row.coeffs.len(), dim, "inequality has wrong dimension");
    }
    let mut rows = reduce(system.iter().cloned())?;
    let mut remaining: Vec<usize> = (0..dim).collect();
    let mut stages = Vec::with_capacity(dim);
    while !remaining.is_empty() {
        // cheapest variable first: fewest lower×upper pairs
        let (pos, &var) = remaining
            .iter()
            .enumerate()
            .min_by_key(|(_, &v)| {
                let lo = rows.iter().filter(|r| r.coeffs[v].is_positive()).count();
                let hi = rows.iter().filter(|r| r.coeffs[v].is_negative()).count();
                (lo * hi) as isize - (lo + hi) as isize
            })
            .expect("nonempty");
        remaining.remove(pos);

        let (mut lower, mut upper, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for r in &rows {
            if r.coeffs[var].is_positive() {
                lower.push(r);
            } else if r.coeffs[var].is_negative() {
                upper.push(r);
            } else {
                rest.push(r.clone());
            }
        }
        for l in &lower {
            for u in &upper {
                let a = &l.coeffs[var];
                let c = -&u.coeffs[var];
                let coeffs = l
                    .coeffs
                    .iter()
                    .zip(&u.coeffs)
                    .map(|(x, y)| &c * x + a * y)
                    .collect();
                rest.push(Ineq {
                    coeffs,
                    rhs: &c * &l.rhs + a * &u.rhs,
                    strict: l.strict || u.strict,
                });
            }
        }
        let next = reduce(rest)?;
        stages.push(Stage { var, rows });
        rows = next;
    }
    Some(Elimination { dim, stages })
}

/// Feasible interval for `var` with every other already-fixed coordinate
/// substituted: `(lower, lower_strict)` and `(upper, upper_strict)`.
type Bound = Option<(Q, bool)>;

fn interval(rows: &[Ineq], var: usize, point: &[Q]) -> (Bound, Bound) {
    let mut lo: Bound = None;
    let mut hi: Bound = None;
    for r in rows {
        let a = &r.coeffs[var];
        if a.is_zero() {
            continue;
        }
        let others: Q = r
            .coeffs
            .iter()
            .zip(point)
            .enumerate()
            .filter(|(i, _)| *i != var)
            .map(|(_, (c, v))| c * v)
            .sum();
        let bound = (&r.rhs - others) / a;
        if a.is_positive() {
            match &lo {
                Some((b, s)) if *b > bound || (*b == bound && (*s || !r.strict)) => {}
                _ => lo = Some((bound, r.strict)),
            }
        } else {
            match &hi {
                Some((b, s)) if *b < bound || (*b == bound && (*s || !r.strict)) => {}
                _ => hi = Some((bound, r.strict)),
            }
        }
    }
    (lo, hi)
}

impl Elimination {
    /// Back-substitution; `pick(lo, hi)` selects a value strictly inside a
    /// bounded open interval.
    fn point(&self, mut pick: impl FnMut(&Q, &Q) -> Q) -> Vec<Q> {
        let mut point = vec![Q::zero(); self.dim];
        for stage in self.stages.iter().rev() {
            let (lo, hi) = interval(&stage.rows, stage.var, &point);
            point[stage.var] = match (lo, hi) {
                (Some((l, _)), Some((h, _))) if l == h => l,
                (Some((l, _)), Some((h, _))) => pick(&l, &h),
                (Some((l, _)), None) => l + Q::one(),
                (None, Some((h, _))) => h - Q::one(),
                (None, None) => Q::zero(),
            };
        }
        point
    }
}

pub fn is_feasible(system: &[Ineq], dim: usize) -> bool {
    eliminate(system, dim).is_some()
}

/// A point satisfying every inequality (strict ones strictly), if any.
pub fn find_point(system: &[Ineq], dim: usize) -> Option<Vec<Q>> {
    let elim = eliminate(system, dim)?;
    let two = Q::from_integer(2.into());
    Some(elim.point(|l, h| (l + h) / &two))
}

/// Like [`find_point`] but places each coordinate at `l + r·(h − l)` with
/// `r ∈ (0, 1)` drawn from `next_fraction`.
pub fn sample_point(system: &[Ineq], dim: usize, mut next_fraction: impl FnMut() -> Q) -> Option<Vec<Q>> {
    let elim = eliminate(system, dim)?;
    Some(elim.point(|l, h| {
        let r = next_fraction();
        debug_assert!(r.is_positive() && r < Q::one());
        l + r * (h - l)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, q_frac};

    fn v(xs: &[i64]) -> Vec<Q> {
        xs.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn open_square_has_interior_point() {
        let sys = vec![
            Ineq::gt(v(&[1, 0]), q(0)),
            Ineq::le(v(&[1, 0]), q(1), true),
            Ineq::gt(v(&[0, 1]), q(0)),
            Ineq::le(v(&[0, 1]), q(1), true),
        ];
        let p = find_point(&sys, 2).unwrap();
        assert!(sys.iter().all(|r| r.holds(&p)));
        assert_eq!(p, vec![q_frac(1, 2), q_frac(1, 2)]);
    }

    #[test]
    fn strictness_matters() {
        // x ≥ 1 and x ≤ 1 is a point, x > 1 and x ≤ 1 is empty
        let closed = vec![Ineq::ge(v(&[1]), q(1)), Ineq::le(v(&[1]), q(1), false)];
        assert_eq!(find_point(&closed, 1), Some(v(&[1])));
        let open = vec![Ineq::gt(v(&[1]), q(1)), Ineq::le(v(&[1]), q(1), false)];
        assert!(!is_feasible(&open, 1));
    }

    #[test]
    fn projection_detects_empty_triangle() {
        // x + y > 2, x < 1, y < 1
        let sys = vec![
            Ineq::gt(v(&[1, 1]), q(2)),
            Ineq::le(v(&[1, 0]), q(1), true),
            Ineq::le(v(&[0, 1]), q(1), true),
        ];
        assert!(!is_feasible(&sys, 2));
        let mut relaxed = sys.clone();
        relaxed[0] = Ineq::ge(v(&[1, 1]), q(2));
        assert!(!is_feasible(&relaxed, 2));
        relaxed[1] = Ineq::le(v(&[1, 0]), q(1), false);
        relaxed[2] = Ineq::le(v(&[0, 1]), q(1), false);
        assert_eq!(find_point(&relaxed, 2), Some(v(&[1, 1])));
    }

    #[test]
    fn unbounded_directions_get_values() {
        let sys = vec![Ineq::gt(v(&[1, -1, 0]), q(3))];
        let p = find_point(&sys, 3).unwrap();
        assert!(sys[0].holds(&p));
    }

    #[test]
    fn sampled_points_are_feasible() {
        let sys = vec![
            Ineq::gt(v(&[1, 2, 0]), q(1)),
            Ineq::le(v(&[1, 1, 1]), q(4), true),
            Ineq::gt(v(&[0, 0, 1]), q(-1)),
            Ineq::gt(v(&[1, 0, 0]), q(0)),
            Ineq::gt(v(&[0, 1, 0]), q(0)),
        ];
        let mut k = 0;
        for _ in 0..5 {
            let p = sample_point(&sys, 3, || {
                k = k % 9 + 1;
                q_frac(k, 10)
            })
            .unwrap();
            assert!(sys.iter().all(|r| r.holds(&p)), "{p:?}");
        }
    }

    #[test]
    fn negation_flips_membership() {
        let r = Ineq::ge(v(&[2, -1]), q(1));
        for p in [v(&[1, 1]), v(&[0, 0]), v(&[3, 1])] {
            assert_ne!(r.holds(&p), r.negated().holds(&p));
        }
    }
}
