//! Recourse-stable regions of an affine instance for a fixed first stage `x`.
//!
//! For each `y ∈ Y` and row `l` the constraint reads `a_l(x,y) · ξ ≥ h_l(x,y)`.
//! The hyperplanes `a_l · ξ = h_l` that meet `U` form `H(x)`; each open cell of
//! their arrangement inside `U` has a constant feasible set `Y_D(x)`.
//! All geometry is exact, via [`crate::fourier_motzkin`].

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier_motzkin::{find_point, is_feasible, sample_point, Ineq};
use crate::instance::{AffineInstance, Constraint, FiniteInstance, Scenario, Sense, UncertaintyBox};
use crate::rational::{format_q, lcm_of_denominators, q_to_f64, serde_q, Q};

pub const MAX_XI_DIM: usize = 3;
pub const MAX_PLANES: usize = 24;
/// Largest `|Y|` enumerated when collecting hyperplanes.
pub const Y_GUARD: u64 = 1 << 16;

/// A `(y, row)` pair that produced a hyperplane.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Source {
    pub y: Vec<i64>,
    pub row: usize,
}

/// `normal · ξ = offset` in canonical form: integral, coprime, first nonzero
/// normal entry positive.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hyperplane {
    #[serde(with = "serde_q::vec")]
    pub normal: Vec<Q>,
    #[serde(with = "serde_q::scalar")]
    pub offset: Q,
    pub provenance: Vec<Source>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "-")]
    Neg,
    #[serde(rename = "+")]
    Pos,
}

impl Sign {
    pub fn symbol(self) -> char {
        match self {
            Sign::Neg => '-',
            Sign::Pos => '+',
        }
    }
}

impl Hyperplane {
    /// Canonical plane through `normal · ξ = offset`; `None` for a zero normal.
    pub fn new(normal: Vec<Q>, offset: Q) -> Option<Self> {
        let (normal, offset) = canonical(normal, offset)?;
        Some(Self {
            normal,
            offset,
            provenance: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// `normal · ξ − offset`.
    pub fn eval(&self, xi: &[Q]) -> Q {
        let lhs: Q = self.normal.iter().zip(xi).map(|(a, v)| a * v).sum();
        lhs - &self.offset
    }

    pub fn side(&self, xi: &[Q]) -> Option<Sign> {
        let v = self.eval(xi);
        if v.is_positive() {
            Some(Sign::Pos)
        } else if v.is_negative() {
            Some(Sign::Neg)
        } else {
            None
        }
    }

    /// The open half-space on the `sign` side.
    pub fn open_side(&self, sign: Sign) -> Ineq {
        match sign {
            Sign::Pos => Ineq::gt(self.normal.clone(), self.offset.clone()),
            Sign::Neg => Ineq::le(self.normal.clone(), self.offset.clone(), true),
        }
    }

    /// The closed half-space on the `sign` side.
    pub fn closed_side(&self, sign: Sign) -> Ineq {
        match sign {
            Sign::Pos => Ineq::ge(self.normal.clone(), self.offset.clone()),
            Sign::Neg => Ineq::le(self.normal.clone(), self.offset.clone(), false),
        }
    }
}

fn canonical(normal: Vec<Q>, offset: Q) -> Option<(Vec<Q>, Q)> {
    let lead = normal.iter().find(|v| !v.is_zero())?;
    let negate = lead.is_negative();
    let scale = lcm_of_denominators(normal.iter().chain(std::iter::once(&offset)));
    let ints: Vec<BigInt> = normal
        .iter()
        .chain(std::iter::once(&offset))
        .map(|v| (v * Q::from_integer(scale.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    let g = if negate { -g } else { g };
    let mut out: Vec<Q> = ints.into_iter().map(|v| Q::from_integer(v / &g)).collect();
    let offset = out.pop().expect("offset present");
    Some((out, offset))
}

/// One open cell of the arrangement intersected with the interior of `U`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub signs: Vec<Sign>,
    /// Rational point strictly inside the cell and `U`.
    #[serde(with = "serde_q::vec")]
    pub witness: Vec<Q>,
    /// `Y_D(x)`, filled by [`feasible_set_on_region`].
    pub feasible_set: Vec<Vec<i64>>,
}

impl Region {
    pub fn sign_string(&self) -> String {
        self.signs.iter().map(|s| s.symbol()).collect()
    }

    pub fn conditions(&self, planes: &[Hyperplane]) -> Vec<(Hyperplane, Sign)> {
        planes.iter().cloned().zip(self.signs.iter().copied()).collect()
    }

    /// Membership in the closure of the cell (ignores `U`).
    pub fn closure_contains(&self, planes: &[Hyperplane], xi: &[Q]) -> bool {
        planes
            .iter()
            .zip(&self.signs)
            .all(|(p, &s)| p.closed_side(s).holds(xi))
    }
}

fn unit(dim: usize, i: usize) -> Vec<Q> {
    (0..dim).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()
}

fn constraint_ineqs(c: &Constraint, strict: bool) -> Result<Vec<Ineq>> {
    Ok(match c.sense {
        Sense::Ge => vec![Ineq {
            coeffs: c.row.clone(),
            rhs: c.rhs.clone(),
            strict,
        }],
        Sense::Le => vec![Ineq::le(c.row.clone(), c.rhs.clone(), strict)],
        Sense::Eq if strict => {
            return Err(Error::InvalidInstance(
                "uncertainty set has an equality constraint and therefore no interior".into(),
            ))
        }
        Sense::Eq => vec![
            Ineq::ge(c.row.clone(), c.rhs.clone()),
            Ineq::le(c.row.clone(), c.rhs.clone(), false),
        ],
    })
}

fn u_system(u: &UncertaintyBox, strict: bool) -> Result<Vec<Ineq>> {
    let d = u.dim();
    let mut out = Vec::with_capacity(2 * d + u.constraints.len());
    for i in 0..d {
        out.push(Ineq {
            coeffs: unit(d, i),
            rhs: u.lower[i].clone(),
            strict,
        });
        out.push(Ineq::le(unit(d, i), u.upper[i].clone(), strict));
    }
    for c in &u.constraints {
        if c.row.len() != d {
            return Err(Error::InvalidInstance(format!(
                "uncertainty constraint has {} coefficients, expected {d}",
                c.row.len()
            )));
        }
        out.extend(constraint_ineqs(c, strict)?);
    }
    Ok(out)
}

/// `U` as closed inequalities.
pub fn u_closed(u: &UncertaintyBox) -> Result<Vec<Ineq>> {
    u_system(u, false)
}

/// The interior of `U` as strict inequalities; rejects `U` with empty interior.
pub fn u_interior(u: &UncertaintyBox) -> Result<Vec<Ineq>> {
    let sys = u_system(u, true)?;
    if !is_feasible(&sys, u.dim()) {
        return Err(Error::InvalidInstance("uncertainty set has empty interior".into()));
    }
    Ok(sys)
}

fn check_dim(n_xi: usize) -> Result<()> {
    if n_xi > MAX_XI_DIM {
        return Err(Error::GuardExceeded(format!(
            "arrangement needs n_xi <= {MAX_XI_DIM}, got {n_xi}"
        )));
    }
    Ok(())
}

fn check_x(inst: &AffineInstance, x: &[i64]) -> Result<()> {
    if x.len() != inst.n_x {
        return Err(Error::InvalidArgument(format!(
            "first-stage point has {} entries, expected n_x = {}",
            x.len(),
            inst.n_x
        )));
    }
    Ok(())
}

/// `H(x)`: distinct hyperplanes with nonzero normal that meet the closed `U`,
/// sorted by `(normal, offset)`. Its length is the empirical `η` at `x`.
pub fn hyperplanes_for(inst: &AffineInstance, x: &[i64]) -> Result<Vec<Hyperplane>> {
    check_dim(inst.n_xi)?;
    check_x(inst, x)?;
    let ys = inst.y_space.enumerate_with_guard(Y_GUARD)?;
    let closed = u_closed(&inst.u_box)?;
    let mut kept: BTreeMap<(Vec<Q>, Q), Vec<Source>> = BTreeMap::new();
    let mut missed: BTreeSet<(Vec<Q>, Q)> = BTreeSet::new();
    for y in &ys {
        for (row, r) in inst.xi_rows(x, y).into_iter().enumerate() {
            let normal = r.normal.iter().map(|&v| Q::from_integer(v.into())).collect();
            let Some(key) = canonical(normal, Q::from_integer(r.offset.into())) else {
                continue;
            };
            let source = Source { y: y.clone(), row };
            if let Some(list) = kept.get_mut(&key) {
                list.push(source);
                continue;
            }
            if missed.contains(&key) {
                continue;
            }
            let mut sys = closed.clone();
            sys.push(Ineq::ge(key.0.clone(), key.1.clone()));
            sys.push(Ineq::le(key.0.clone(), key.1.clone(), false));
            if is_feasible(&sys, inst.n_xi) {
                kept.insert(key, vec![source]);
            } else {
                missed.insert(key);
            }
        }
    }
    Ok(kept
        .into_iter()
        .map(|((normal, offset), provenance)| Hyperplane {
            normal,
            offset,
            provenance,
        })
        .collect())
}

/// Open cells of the arrangement inside the interior of `U`, sorted by sign
/// vector (`−` before `+`). Feasible sets are left empty.
pub fn enumerate_regions(planes: &[Hyperplane], u: &UncertaintyBox) -> Result<Vec<Region>> {
    let d = u.dim();
    check_dim(d)?;
    if planes.len() > MAX_PLANES {
        return Err(Error::GuardExceeded(format!(
            "arrangement has {} hyperplanes (limit {MAX_PLANES})",
            planes.len()
        )));
    }
    if let Some(p) = planes.iter().find(|p| p.dim() != d) {
        return Err(Error::InvalidArgument(format!(
            "hyperplane of dimension {} in a {d}-dimensional uncertainty set",
            p.dim()
        )));
    }
    let interior = u_interior(u)?;
    let start = find_point(&interior, d).expect("interior checked nonempty");
    let mut cells: Vec<(Vec<Sign>, Vec<Q>)> = vec![(Vec::new(), start)];
    for (idx, plane) in planes.iter().enumerate() {
        let grown: Vec<Vec<(Vec<Sign>, Vec<Q>)>> = cells
            .par_iter()
            .map(|(signs, witness)| {
                let here = plane.side(witness);
                let mut out = Vec::with_capacity(2);
                for sign in [Sign::Neg, Sign::Pos] {
                    let point = if here == Some(sign) {
                        Some(witness.clone())
                    } else {
                        let mut sys = interior.clone();
                        sys.extend(planes[..idx].iter().zip(signs).map(|(p, &s)| p.open_side(s)));
                        sys.push(plane.open_side(sign));
                        find_point(&sys, d)
                    };
                    if let Some(point) = point {
                        let mut next = signs.clone();
                        next.push(sign);
                        out.push((next, point));
                    }
                }
                out
            })
            .collect();
        cells = grown.into_iter().flatten().collect();
    }
    Ok(cells
        .into_iter()
        .map(|(signs, witness)| Region {
            signs,
            witness,
            feasible_set: Vec::new(),
        })
        .collect())
}

/// `Y_D(x)`: members of `Y` feasible at the region's witness.
pub fn feasible_set_on_region(inst: &AffineInstance, x: &[i64], region: &Region) -> Result<Vec<Vec<i64>>> {
    check_x(inst, x)?;
    Ok(inst
        .y_space
        .enumerate_with_guard(Y_GUARD)?
        .into_iter()
        .filter(|y| inst.is_feasible_at(x, y, &region.witness))
        .collect())
}

/// The open cell of `region` inside the interior of `U`.
fn region_system(conditions: &[(Hyperplane, Sign)], u: &UncertaintyBox) -> Result<Vec<Ineq>> {
    let mut sys = u_system(u, true)?;
    sys.extend(conditions.iter().map(|(p, s)| p.open_side(*s)));
    Ok(sys)
}

/// Draws `samples` random rational points of the region and checks that the
/// feasible set at each equals `region.feasible_set`.
pub fn cross_check_region(
    inst: &AffineInstance,
    x: &[i64],
    planes: &[Hyperplane],
    region: &Region,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<bool> {
    let sys = region_system(&region.conditions(planes), &inst.u_box)?;
    let ys = inst.y_space.enumerate_with_guard(Y_GUARD)?;
    for _ in 0..samples {
        let Some(point) = sample_point(&sys, inst.n_xi, || Q::new(rng.gen_range(1..1000).into(), 1000.into()))
        else {
            return Ok(false);
        };
        debug_assert!(sys.iter().all(|r| r.holds(&point)));
        let here: Vec<Vec<i64>> = ys
            .iter()
            .filter(|y| inst.is_feasible_at(x, y, &point))
            .cloned()
            .collect();
        if here != region.feasible_set {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether every `y ∈ Y` is feasible on all or none of the open set cut out
/// of `U` by `conditions`. Decided exactly: `y` breaks stability iff the set
/// contains both a point satisfying all of its rows and a point violating
/// one of them.
pub fn verify_recourse_stability(
    inst: &AffineInstance,
    x: &[i64],
    conditions: &[(Hyperplane, Sign)],
) -> Result<bool> {
    check_x(inst, x)?;
    let base = region_system(conditions, &inst.u_box)?;
    let d = inst.n_xi;
    if !is_feasible(&base, d) {
        return Ok(true);
    }
    for y in inst.y_space.enumerate_with_guard(Y_GUARD)? {
        let rows: Vec<Ineq> = inst
            .xi_rows(x, &y)
            .into_iter()
            .map(|r| {
                Ineq::ge(
                    r.normal.iter().map(|&v| Q::from_integer(v.into())).collect(),
                    Q::from_integer(r.offset.into()),
                )
            })
            .collect();
        let mut feasible = base.clone();
        feasible.extend(rows.iter().cloned());
        if !is_feasible(&feasible, d) {
            continue;
        }
        for r in &rows {
            let mut broken = base.clone();
            broken.push(r.negated());
            if is_feasible(&broken, d) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn solve_square(rows: &[(&[Q], &Q)]) -> Option<Vec<Q>> {
    let n = rows.len();
    let mut m: Vec<Vec<Q>> = rows
        .iter()
        .map(|(a, b)| a.iter().cloned().chain(std::iter::once((*b).clone())).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let p = m[col][col].clone();
        for v in m[col].iter_mut() {
            *v /= &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=n {
                    let delta = &f * &m[col][c];
                    m[r][c] -= delta;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

/// Test points for the closure-cover check: vertices of the arrangement
/// together with the facets of `U`, plus a 5-point grid per axis of the box.
fn cover_test_points(planes: &[Hyperplane], u: &UncertaintyBox) -> Result<Vec<Vec<Q>>> {
    let d = u.dim();
    let closed = u_closed(u)?;
    let mut flats: Vec<(Vec<Q>, Q)> = planes.iter().map(|p| (p.normal.clone(), p.offset.clone())).collect();
    for i in 0..d {
        flats.push((unit(d, i), u.lower[i].clone()));
        flats.push((unit(d, i), u.upper[i].clone()));
    }
    flats.extend(u.constraints.iter().map(|c| (c.row.clone(), c.rhs.clone())));

    let mut points = BTreeSet::new();
    let mut idx: Vec<usize> = (0..d).collect();
    if d > 0 && flats.len() >= d {
        loop {
            let rows: Vec<(&[Q], &Q)> = idx.iter().map(|&i| (flats[i].0.as_slice(), &flats[i].1)).collect();
            if let Some(p) = solve_square(&rows) {
                if closed.iter().all(|r| r.holds(&p)) {
                    points.insert(p);
                }
            }
            // next combination
            let mut k = d;
            while k > 0 && idx[k - 1] == flats.len() - d + k - 1 {
                k -= 1;
            }
            if k == 0 {
                break;
            }
            idx[k - 1] += 1;
            for j in k..d {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }

    let steps = 4;
    let mut grid = vec![Vec::new()];
    for i in 0..d {
        let span = &u.upper[i] - &u.lower[i];
        grid = grid
            .into_iter()
            .flat_map(|p: Vec<Q>| {
                let span = span.clone();
                let lo = u.lower[i].clone();
                (0..=steps).map(move |k| {
                    let mut next = p.clone();
                    next.push(&lo + &span * Q::new(k.into(), steps.into()));
                    next
                })
            })
            .collect();
    }
    points.extend(grid.into_iter().filter(|p| closed.iter().all(|r| r.holds(p))));
    Ok(points.into_iter().collect())
}

/// Checks that every arrangement vertex and grid point of `U` lies in the
/// closure of some region.
pub fn closures_cover(planes: &[Hyperplane], regions: &[Region], u: &UncertaintyBox) -> Result<bool> {
    Ok(cover_test_points(planes, u)?
        .iter()
        .all(|p| regions.iter().any(|r| r.closure_contains(planes, p))))
}

/// Hyperplanes and regions at one first-stage point, with feasible sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Arrangement {
    pub x: Vec<i64>,
    pub planes: Vec<Hyperplane>,
    pub regions: Vec<Region>,
}

impl Arrangement {
    /// `η := max{1, |H(x)|}`.
    pub fn eta(&self) -> usize {
        self.planes.len().max(1)
    }
}

pub fn arrangement_for(inst: &AffineInstance, x: &[i64]) -> Result<Arrangement> {
    let planes = hyperplanes_for(inst, x)?;
    let mut regions = enumerate_regions(&planes, &inst.u_box)?;
    let ys = inst.y_space.enumerate_with_guard(Y_GUARD)?;
    for r in regions.iter_mut() {
        r.feasible_set = ys
            .iter()
            .filter(|y| inst.is_feasible_at(x, y, &r.witness))
            .cloned()
            .collect();
    }
    Ok(Arrangement {
        x: x.to_vec(),
        planes,
        regions,
    })
}

/// Number of recourse-stable regions at `x`, after checking that their
/// closures cover `U`.
pub fn empirical_r(inst: &AffineInstance, x: &[i64]) -> Result<usize> {
    let planes = hyperplanes_for(inst, x)?;
    let regions = enumerate_regions(&planes, &inst.u_box)?;
    if !closures_cover(&planes, &regions, &inst.u_box)? {
        return Err(Error::InvalidInstance(
            "region closures fail to cover the uncertainty set".into(),
        ));
    }
    Ok(regions.len())
}

/// Finite instance with one scenario per point of `points`.
pub fn discretize(inst: &AffineInstance, x: &[i64], points: &[Vec<Q>]) -> Result<FiniteInstance> {
    check_x(inst, x)?;
    let zi = |v: i64| Q::from_integer(v.into());
    let mut scenarios = Vec::with_capacity(points.len());
    for xi in points {
        if xi.len() != inst.n_xi {
            return Err(Error::InvalidArgument(format!(
                "scenario point has {} entries, expected n_xi = {}",
                xi.len(),
                inst.n_xi
            )));
        }
        let constraints = (0..inst.m)
            .map(|l| {
                let row = (0..inst.n_y)
                    .map(|j| {
                        let mut v = zi(inst.b[l][j]);
                        for i in 0..inst.n_xi {
                            v += zi(inst.bi[i][l][j]) * &xi[i];
                        }
                        v
                    })
                    .collect();
                let mut rhs = zi(inst.h[l]);
                for i in 0..inst.n_xi {
                    rhs += zi(inst.h_mat[l][i]) * &xi[i];
                }
                for k in 0..inst.n_x {
                    let mut a = zi(inst.a[l][k]);
                    for i in 0..inst.n_xi {
                        a += zi(inst.ai[i][l][k]) * &xi[i];
                    }
                    rhs -= a * zi(x[k]);
                }
                Constraint::new(row, Sense::Ge, rhs)
            })
            .collect();
        scenarios.push(Scenario {
            objective: inst.objective.coefficients_at(xi),
            constraints,
        });
    }
    let name = inst.name.as_deref().unwrap_or("affine");
    Ok(FiniteInstance::new(inst.y_space.clone(), scenarios).named(format!("{name}-discretized")))
}

pub fn regions_to_json(regions: &[Region]) -> String {
    serde_json::to_string_pretty(regions).expect("regions serialize")
}

/// One CSV row per region: index, sign string, float coordinates of the
/// witness, the exact witness and the feasible set.
pub fn write_regions_csv<W: Write>(regions: &[Region], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let d = regions.first().map_or(0, |r| r.witness.len());
    let mut header = vec!["region".to_string(), "signs".to_string()];
    header.extend((1..=d).map(|i| format!("xi{i}")));
    header.push("witness".into());
    header.push("feasible_set".into());
    w.write_record(&header)?;
    for (k, r) in regions.iter().enumerate() {
        let mut rec = vec![k.to_string(), r.sign_string()];
        rec.extend(r.witness.iter().map(|v| q_to_f64(v).to_string()));
        rec.push(r.witness.iter().map(format_q).collect::<Vec<_>>().join(";"));
        rec.push(
            r.feasible_set
                .iter()
                .map(|y| y.iter().map(i64::to_string).collect::<Vec<_>>().join(" "))
                .collect::<Vec<_>>()
                .join(";"),
        );
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{cardinality_band_affine, recourse_regions};
    use crate::rational::{q, q_frac};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(xs: &[i64]) -> Vec<Q> {
        xs.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn canonical_form_is_unique() {
        let a = Hyperplane::new(vec![q(-2), q(4)], q(6)).unwrap();
        let b = Hyperplane::new(vec![q_frac(1, 3), q_frac(-2, 3)], q(-1)).unwrap();
        assert_eq!((a.normal.clone(), a.offset.clone()), (b.normal, b.offset));
        assert_eq!(a.normal, v(&[1, -2]));
        assert_eq!(a.offset, q(-3));
        assert!(Hyperplane::new(v(&[0, 0]), q(1)).is_none());
    }

    #[test]
    fn recourse_regions_planes() {
        let inst = recourse_regions();
        let planes = hyperplanes_for(&inst, &[0]).unwrap();
        let shapes: Vec<_> = planes.iter().map(|p| (p.normal.clone(), p.offset.clone())).collect();
        assert_eq!(shapes, vec![(v(&[0, 1]), q(1)), (v(&[1, -1]), q(0))]);
        assert_eq!(planes[0].provenance, vec![Source { y: vec![1, 0], row: 1 }]);
        assert_eq!(planes[1].provenance, vec![Source { y: vec![0, 1], row: 0 }]);
    }

    #[test]
    fn recourse_regions_cells() {
        let inst = recourse_regions();
        let arr = arrangement_for(&inst, &[0]).unwrap();
        let got: Vec<_> = arr
            .regions
            .iter()
            .map(|r| (r.sign_string(), r.feasible_set.clone()))
            .collect();
        assert_eq!(
            got,
            vec![
                ("-+".to_string(), vec![vec![0, 1], vec![1, 0], vec![1, 1]]),
                ("+-".to_string(), vec![vec![1, 1]]),
                ("++".to_string(), vec![vec![0, 1], vec![1, 1]]),
            ]
        );
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for r in &arr.regions {
            assert!(verify_recourse_stability(&inst, &[0], &r.conditions(&arr.planes)).unwrap());
            assert!(cross_check_region(&inst, &[0], &arr.planes, r, 3, &mut rng).unwrap());
        }
        assert!(closures_cover(&arr.planes, &arr.regions, &inst.u_box).unwrap());
        assert_eq!(empirical_r(&inst, &[0]).unwrap(), 3);
    }

    #[test]
    fn merged_or_ignored_cells_are_not_stable() {
        let inst = recourse_regions();
        let planes = hyperplanes_for(&inst, &[0]).unwrap();
        // keep only ξ1 > ξ2: this merges the cells below and above ξ2 = 1
        let merged = vec![(planes[1].clone(), Sign::Pos)];
        assert!(!verify_recourse_stability(&inst, &[0], &merged).unwrap());
        assert!(!verify_recourse_stability(&inst, &[0], &[]).unwrap());
    }

    #[test]
    fn empty_and_crossing_arrangements() {
        let u = UncertaintyBox::new(v(&[0, 0]), v(&[4, 4]));
        let none = enumerate_regions(&[], &u).unwrap();
        assert_eq!(none.len(), 1);
        assert!(none[0].signs.is_empty());
        let cross = [
            Hyperplane::new(v(&[1, 0]), q(2)).unwrap(),
            Hyperplane::new(v(&[0, 1]), q(2)).unwrap(),
        ];
        let cells = enumerate_regions(&cross, &u).unwrap();
        assert_eq!(cells.len(), 4);
        for c in &cells {
            for (p, s) in cross.iter().zip(&c.signs) {
                assert_eq!(p.side(&c.witness), Some(*s));
            }
        }
        assert!(closures_cover(&cross, &cells, &u).unwrap());
    }

    #[test]
    fn degenerate_u_is_rejected() {
        let u = UncertaintyBox::new(v(&[0, 1]), v(&[3, 1]));
        assert!(matches!(enumerate_regions(&[], &u), Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn cardinality_band_has_n_plus_one_planes() {
        for n in 1..=5 {
            let inst = cardinality_band_affine(n).unwrap();
            let arr = arrangement_for(&inst, &[0]).unwrap();
            assert_eq!(arr.planes.len(), n + 1);
            assert_eq!(arr.regions.len(), n);
            for r in &arr.regions {
                let sums: BTreeSet<i64> = r.feasible_set.iter().map(|y| y.iter().sum()).collect();
                assert_eq!(sums.len(), 1);
            }
        }
    }

    #[test]
    fn discretized_scenarios_match_affine_feasibility() {
        let inst = recourse_regions();
        let arr = arrangement_for(&inst, &[0]).unwrap();
        let points: Vec<_> = arr.regions.iter().map(|r| r.witness.clone()).collect();
        let fin = discretize(&inst, &[0], &points).unwrap();
        for (sc, r) in fin.scenarios.iter().zip(&arr.regions) {
            let ys: Vec<_> = fin
                .y_space
                .enumerate()
                .unwrap()
                .into_iter()
                .filter(|y| sc.is_feasible(y))
                .collect();
            assert_eq!(ys, r.feasible_set);
        }
    }

    #[test]
    fn dimension_guard() {
        let mut inst = cardinality_band_affine(2).unwrap();
        inst.n_xi = 4;
        assert!(matches!(hyperplanes_for(&inst, &[0]), Err(Error::GuardExceeded(_))));
    }

    #[test]
    fn csv_dump_has_one_row_per_region() {
        let arr = arrangement_for(&recourse_regions(), &[0]).unwrap();
        let mut buf = Vec::new();
        write_regions_csv(&arr.regions, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("region,signs,xi1,xi2,witness,feasible_set"));
        let back: Vec<Region> = serde_json::from_str(&regions_to_json(&arr.regions)).unwrap();
        assert_eq!(back, arr.regions);
    }
}
