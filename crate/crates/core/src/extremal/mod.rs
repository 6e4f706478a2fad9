//! Extreme, exposed, denting and strongly exposed molecules, decided from
//! the metric with re-checkable evidence.
//!
//! For a pair `(x,y)` everything is read off the excess
//! `e(z) = d(x,z) + d(z,y) - d(x,y)` and the min-distance
//! `min(d(x,z), d(y,z))` of the other points:
//!
//! * extreme: no `z` has `e(z) = 0`;
//! * denting: for every `eps > 0` the points with min-distance `>= eps` have
//!   excess bounded away from 0;
//! * property (Z): `e(z) / min-distance` gets arbitrarily small;
//!   strongly exposed is its negation.
//!
//! Gallery truncations extend each decision past the last point with the
//! family's [`TailCertificate`].

mod checker;
mod oracle;
mod verdict;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

pub use checker::check_verdict;
pub use oracle::{oracle_extreme_points, oracle_extreme_points_with_cap, DEFAULT_ORACLE_CAP};
pub use verdict::{ClassificationRow, Cmp, Evidence, EvidenceKind, Property, Status, Verdict};

use crate::error::{Error, Result};
use crate::free_space::Molecule;
use crate::lipschitz::{build_f_xy, pair_molecule};
use crate::metric::{certificate_for, MetricSpace, PointId, SpaceKind, TailCertificate, TailExcess, TailShape};
use crate::rational::{self, int, ratio, Rational};

pub const DEFAULT_DEPTH: usize = 20;

pub fn default_eps_grid() -> Vec<Rational> {
    [1, 2, 4, 8, 16].iter().map(|&k| ratio(1, k)).collect()
}

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    pub depth: usize,
    pub eps_grid: Vec<Rational>,
    pub oracle_cap: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { depth: DEFAULT_DEPTH, eps_grid: default_eps_grid(), oracle_cap: DEFAULT_ORACLE_CAP }
    }
}

fn others(space: &MetricSpace, x: PointId, y: PointId) -> impl Iterator<Item = PointId> + '_ {
    space.points().filter(move |&z| z != x && z != y)
}

fn min_distance(space: &MetricSpace, x: PointId, y: PointId, z: PointId) -> Rational {
    space.d(x, z).min(space.d(y, z)).clone()
}

fn first_segment_point(space: &MetricSpace, x: PointId, y: PointId) -> Option<PointId> {
    others(space, x, y).find(|&z| space.excess(x, y, z).is_zero())
}

fn segment_row(space: &MetricSpace, x: PointId, y: PointId, z: PointId) -> Evidence {
    let through = space.d(x, z) + space.d(z, y);
    let rel = if space.excess(x, y, z).is_zero() { Cmp::Eq } else { Cmp::Gt };
    let kind = if rel == Cmp::Eq { EvidenceKind::SegmentPoint } else { EvidenceKind::OffSegment };
    Evidence::new(kind, through, rel, space.d(x, y).clone()).at_point(space, x, y, z)
}

fn tail_coefficient(cert: &TailCertificate) -> Rational {
    match &cert.shape {
        TailShape::Uniform { excess_at_least } => excess_at_least.clone(),
        TailShape::Harmonic { c, .. } | TailShape::Branch { c } => c.clone(),
    }
}

fn tail_strict_row(cert: &TailCertificate) -> Evidence {
    Evidence::new(EvidenceKind::TailStrict, tail_coefficient(cert), Cmp::Gt, Rational::zero())
}

/// Extreme iff the segment `[x,y]` is `{x,y}`.
pub fn is_extreme(space: &MetricSpace, x: PointId, y: PointId) -> Result<Verdict> {
    space.check_pair(x, y)?;
    let cert = certificate_for(space, x, y);
    let mut v = Verdict::new(Property::Extreme, space, x, y, cert.clone());
    if let Some(z) = first_segment_point(space, x, y) {
        v.status = Status::Refuted;
        v.evidence.push(segment_row(space, x, y, z));
        return Ok(v);
    }
    v.evidence = others(space, x, y).map(|z| segment_row(space, x, y, z)).collect();
    v.status = match &cert {
        None => Status::Proven,
        Some(c) if c.tail_is_strict() => {
            v.evidence.push(tail_strict_row(c));
            Status::Proven
        }
        Some(_) => Status::Inconclusive,
    };
    Ok(v)
}

fn check_grid(eps_grid: &[Rational]) -> Result<()> {
    if eps_grid.is_empty() {
        return Err(Error::InvalidParameter("eps grid is empty".into()));
    }
    if eps_grid.iter().any(|e| !e.is_positive()) {
        return Err(Error::InvalidParameter("eps grid entries must be positive".into()));
    }
    if eps_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("eps grid must be strictly descending".into()));
    }
    Ok(())
}

/// Largest grid value not above `bound`, or `bound` itself.
fn grid_eps_below(eps_grid: &[Rational], bound: &Rational) -> Rational {
    eps_grid.iter().find(|e| *e <= bound).cloned().unwrap_or_else(|| bound.clone())
}

/// `delta(eps) = 1 - d(x,y) / min_sum` over the points of the space with
/// min-distance `>= eps` (1 when there are none), lowered to
/// `e / (d(x,y) + e)` when the tail contributes excess at least `e`.
/// Returns the value and the minimizing point of the space.
pub(crate) fn denting_delta(
    space: &MetricSpace,
    x: PointId,
    y: PointId,
    eps: &Rational,
    cert: Option<&TailCertificate>,
) -> (Rational, Option<PointId>) {
    let d = space.d(x, y);
    let best = others(space, x, y)
        .filter(|&z| &min_distance(space, x, y, z) >= eps)
        .map(|z| (space.d(x, z) + space.d(z, y), z))
        .min_by(|a, b| a.0.cmp(&b.0));
    let mut delta = match &best {
        Some((sum, _)) => Rational::one() - d / sum,
        None => Rational::one(),
    };
    if let Some(TailExcess::AtLeast(e)) = cert.map(|c| c.excess_lower_bound(eps)) {
        let tail = &e / (d + &e);
        if tail < delta {
            delta = tail;
        }
    }
    (delta, best.map(|(_, z)| z))
}

/// The ε–δ test for denting points over `eps_grid` (strictly descending).
pub fn is_denting(space: &MetricSpace, x: PointId, y: PointId, eps_grid: &[Rational]) -> Result<Verdict> {
    space.check_pair(x, y)?;
    check_grid(eps_grid)?;
    let cert = certificate_for(space, x, y);
    let mut v = Verdict::new(Property::Denting, space, x, y, cert.clone());
    if let Some(z) = first_segment_point(space, x, y) {
        let eps = grid_eps_below(eps_grid, &min_distance(space, x, y, z));
        let m = min_distance(space, x, y, z);
        v.evidence.push(
            Evidence::new(EvidenceKind::DentingFailure, m, Cmp::Ge, eps.clone())
                .at_point(space, x, y, z)
                .with_level(eps),
        );
        v.status = Status::Refuted;
        return Ok(v);
    }
    if let Some(floor) = cert.as_ref().and_then(|c| c.vanishing_floor()) {
        let eps = grid_eps_below(eps_grid, &floor);
        let half = space.len() / 2;
        for z in others(space, x, y).filter(|z| z.0 > half) {
            let m = min_distance(space, x, y, z);
            if m >= eps {
                v.evidence.push(
                    Evidence::new(EvidenceKind::DentingFailure, m, Cmp::Ge, eps.clone())
                        .at_point(space, x, y, z)
                        .with_level(eps.clone()),
                );
            }
        }
        v.evidence.push(
            Evidence::new(EvidenceKind::TailVanishing, floor, Cmp::Ge, eps.clone()).with_level(eps),
        );
        v.status = Status::Refuted;
        return Ok(v);
    }
    let mut all_positive = true;
    for eps in eps_grid {
        let (delta, arg) = denting_delta(space, x, y, eps, cert.as_ref());
        all_positive &= delta.is_positive();
        let mut row = Evidence::new(EvidenceKind::DentingRow, delta, Cmp::Gt, Rational::zero());
        if let Some(z) = arg {
            row = row.at_point(space, x, y, z);
        }
        v.evidence.push(row.with_level(eps.clone()));
    }
    v.evidence.extend(others(space, x, y).map(|z| segment_row(space, x, y, z)));
    v.status = match &cert {
        None => Status::Proven,
        Some(c) if all_positive && c.tail_is_strict() => {
            v.evidence.push(tail_strict_row(c));
            Status::Proven
        }
        Some(_) => Status::Inconclusive,
    };
    Ok(v)
}

fn z_row(kind: EvidenceKind, space: &MetricSpace, x: PointId, y: PointId, z: PointId, n: u64) -> Evidence {
    let n_r = Rational::from_integer(n.into());
    let lhs = space.d(x, z) + space.d(y, z);
    let rhs = space.d(x, y) + min_distance(space, x, y, z) / &n_r;
    let rel = if kind == EvidenceKind::ZWitness { Cmp::Le } else { Cmp::Gt };
    Evidence::new(kind, lhs, rel, rhs).at_point(space, x, y, z).with_level(n_r)
}

/// Closed-form (Z) witness row for a gallery point that may lie past the
/// truncation.
fn schedule_row(cert: &TailCertificate, z: usize, n: u64) -> Evidence {
    let fam = cert.family;
    let (dx, dy, dxy) = (fam.distance(cert.x, z), fam.distance(cert.y, z), fam.distance(cert.x, cert.y));
    let n_r = Rational::from_integer(n.into());
    let min = (&dx).min(&dy).clone();
    let mut row = Evidence::new(EvidenceKind::ZWitness, &dx + &dy, Cmp::Le, &dxy + &min / &n_r);
    row.witness = vec![fam.label(z)];
    row.excess = Some(&dx + &dy - &dxy);
    row.min_distance = Some(min);
    row.with_level(n_r)
}

/// Level at which (Z) fails when `excess / min-distance >= rho > 0`
/// everywhere: the smallest integer `n > 1/rho`.
fn failure_level(rho: &Rational) -> u64 {
    rational::floor_to_u64(&(Rational::one() / rho)) + 1
}

/// Property (Z): for every `n` some `z` outside `{x,y}` has
/// `d(x,z) + d(y,z) <= d(x,y) + min(d(x,z), d(y,z)) / n`. Witnesses are listed
/// for `n = 1..=depth`.
pub fn has_property_z(space: &MetricSpace, x: PointId, y: PointId, depth: usize) -> Result<Verdict> {
    space.check_pair(x, y)?;
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    let cert = certificate_for(space, x, y);
    let mut v = Verdict::new(Property::PropertyZ, space, x, y, cert.clone());
    if let Some(z) = first_segment_point(space, x, y) {
        v.evidence = (1..=depth as u64).map(|n| z_row(EvidenceKind::ZWitness, space, x, y, z, n)).collect();
        v.status = Status::Proven;
        return Ok(v);
    }
    if let Some(c) = &cert {
        if c.z_witness(1).is_some() {
            for n in 1..=depth as u64 {
                let z = c.z_witness(n).ok_or_else(|| {
                    Error::Invariant(format!("witness schedule for ({}, {}) stops at level {n}", c.pair[0], c.pair[1]))
                })?;
                v.evidence.push(schedule_row(c, z, n));
            }
            v.evidence.push(Evidence::new(EvidenceKind::TailSchedule, tail_coefficient(c), Cmp::Gt, Rational::zero()));
            v.status = Status::Proven;
            return Ok(v);
        }
        if !matches!(c.shape, TailShape::Uniform { .. }) {
            return Ok(v);
        }
    }
    let mut rho = others(space, x, y)
        .map(|z| space.excess(x, y, z) / min_distance(space, x, y, z))
        .min();
    if let Some(c) = &cert {
        let tail = c.ratio_lower_bound();
        rho = Some(rho.map_or(tail.clone(), |r| r.min(tail)));
    }
    let level = match &rho {
        None => 1,
        Some(r) if r.is_positive() => failure_level(r),
        Some(_) => return Ok(v),
    };
    v.evidence = others(space, x, y).map(|z| z_row(EvidenceKind::ZFailure, space, x, y, z, level)).collect();
    if let Some(c) = &cert {
        v.evidence.push(
            Evidence::new(EvidenceKind::TailRatio, c.ratio_lower_bound(), Cmp::Gt, ratio(1, level as i64))
                .with_level(int(level as i64)),
        );
    }
    v.status = Status::Refuted;
    Ok(v)
}

/// Strongly exposed iff (Z) fails; the (Z) evidence is passed through.
pub fn is_strongly_exposed(space: &MetricSpace, x: PointId, y: PointId, depth: usize) -> Result<Verdict> {
    let mut v = has_property_z(space, x, y, depth)?;
    v.property = Property::StronglyExposed;
    v.status = v.status.negate();
    Ok(v)
}

/// Whether `f_xy` attains its maximum over the molecules only at `m_xy`.
/// Decided on finite spaces only.
pub fn is_exposed_by_fxy(space: &MetricSpace, x: PointId, y: PointId) -> Result<Verdict> {
    space.check_pair(x, y)?;
    let cert = certificate_for(space, x, y);
    let mut v = Verdict::new(Property::ExposedByFxy, space, x, y, cert.clone());
    if cert.is_some() {
        return Ok(v);
    }
    let f = build_f_xy(space, x, y)?;
    let target = Molecule { x, y };
    let mut best: Option<(Rational, Molecule)> = None;
    for m in Molecule::all(space).into_iter().filter(|&m| m != target) {
        let p = pair_molecule(space, &f, m);
        if p == Rational::one() {
            let mut row = Evidence::new(EvidenceKind::ExposureTie, p, Cmp::Eq, Rational::one());
            row.witness = vec![space.label(m.x).to_string(), space.label(m.y).to_string()];
            v.evidence.push(row);
            v.status = Status::Refuted;
            return Ok(v);
        }
        if best.as_ref().is_none_or(|(b, _)| p > *b) {
            best = Some((p, m));
        }
    }
    let (p, m) = best.expect("a space with molecules has m_yx besides m_xy");
    let mut row = Evidence::new(EvidenceKind::ExposureGap, p, Cmp::Lt, Rational::one());
    row.witness = vec![space.label(m.x).to_string(), space.label(m.y).to_string()];
    v.evidence.push(row);
    v.status = Status::Proven;
    Ok(v)
}

fn classify_one(space: &MetricSpace, m: Molecule, opts: &ClassifyOptions, oracle: Option<&[Molecule]>) -> Result<ClassificationRow> {
    let row = ClassificationRow {
        molecule: [space.label(m.x).to_string(), space.label(m.y).to_string()],
        extreme: is_extreme(space, m.x, m.y)?,
        exposed_by_fxy: is_exposed_by_fxy(space, m.x, m.y)?,
        denting: is_denting(space, m.x, m.y, &opts.eps_grid)?,
        strongly_exposed: is_strongly_exposed(space, m.x, m.y, opts.depth)?,
        oracle_extreme: oracle.map(|o| o.binary_search(&m).is_ok()),
    };
    if !row.chain_holds() {
        return Err(Error::Invariant(format!("implication chain broken for {}", m.label(space))));
    }
    if let Some(on_oracle) = row.oracle_extreme {
        let statuses = [&row.extreme, &row.exposed_by_fxy, &row.denting, &row.strongly_exposed];
        if statuses.iter().any(|v| v.is_proven() != on_oracle || v.status == Status::Inconclusive) {
            return Err(Error::Invariant(format!(
                "finite-space classification of {} disagrees with the oracle ({on_oracle})",
                m.label(space)
            )));
        }
    }
    Ok(row)
}

/// One row per ordered molecule. On finite spaces within the oracle cap the
/// oracle is consulted and every verdict must match it.
pub fn classify_all(space: &MetricSpace, opts: &ClassifyOptions) -> Result<Vec<ClassificationRow>> {
    space.has_molecules()?;
    let oracle = match space.kind() {
        SpaceKind::Gallery { .. } => None,
        _ if space.len() <= opts.oracle_cap => Some(oracle_extreme_points_with_cap(space, opts.oracle_cap)?),
        _ => None,
    };
    Molecule::all(space)
        .par_iter()
        .map(|&m| classify_one(space, m, opts, oracle.as_deref()))
        .collect()
}

/// Classification of a single pair.
pub fn classify_pair(space: &MetricSpace, x: PointId, y: PointId, opts: &ClassifyOptions) -> Result<ClassificationRow> {
    let m = Molecule::new(space, x, y)?;
    let oracle = match space.kind() {
        SpaceKind::Gallery { .. } => None,
        _ if space.len() <= opts.oracle_cap => Some(oracle_extreme_points_with_cap(space, opts.oracle_cap)?),
        _ => None,
    };
    classify_one(space, m, opts, oracle.as_deref())
}

#[cfg(test)]
mod tests;
