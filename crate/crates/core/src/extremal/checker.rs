//! Independent re-verification of [`Verdict`] evidence.
//!
//! Every row is recomputed from the distance matrix (points past a gallery
//! truncation use the family's closed form), and the rows present must be
//! enough to support the verdict's status. Nothing here calls the deciding
//! code in the parent module.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use super::verdict::{Cmp, Evidence, EvidenceKind as K, Property, Status, Verdict};
use crate::metric::{Family, MetricSpace, PointId, SpaceKind, TailCertificate, TailExcess, TailShape};
use crate::rational::{self, int, Rational};

type Check<T = ()> = std::result::Result<T, String>;

/// Extra points appended past the truncation when re-checking certificates.
const DEEP_EXTRA: usize = 64;

struct Ctx<'a> {
    space: &'a MetricSpace,
    family: Option<(Family, usize)>,
    x: usize,
    y: usize,
}

impl Ctx<'_> {
    fn index(&self, label: &str) -> Check<usize> {
        if let Ok(p) = self.space.point(label) {
            return Ok(p.0);
        }
        self.family
            .and_then(|(f, _)| f.index_of(label))
            .ok_or_else(|| format!("unknown witness `{label}`"))
    }

    fn d(&self, i: usize, j: usize) -> Rational {
        if i < self.space.len() && j < self.space.len() {
            return self.space.d(PointId(i), PointId(j)).clone();
        }
        let (f, _) = self.family.expect("indices past the space only resolve on galleries");
        f.distance(i, j)
    }

    fn through(&self, z: usize) -> Rational {
        self.d(self.x, z) + self.d(z, self.y)
    }

    fn min_dist(&self, z: usize) -> Rational {
        self.d(self.x, z).min(self.d(self.y, z))
    }

    fn others(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.space.len()).filter(move |&z| z != self.x && z != self.y)
    }
}

fn expect_eq(what: &str, recorded: &Rational, actual: &Rational) -> Check {
    if recorded == actual {
        Ok(())
    } else {
        Err(format!(
            "{what}: recorded {} but recomputed {}",
            rational::format(recorded),
            rational::format(actual)
        ))
    }
}

fn expect_rel(row: &Evidence, rel: Cmp) -> Check {
    if row.relation != rel {
        return Err(format!("{:?} row must use {:?}, found {:?}", row.kind, rel, row.relation));
    }
    if !row.holds() {
        return Err(format!(
            "{:?} row does not hold: {} {:?} {}",
            row.kind,
            rational::format(&row.lhs),
            row.relation,
            rational::format(&row.rhs)
        ));
    }
    Ok(())
}

/// Resolves a single-point witness and checks the optional excess and
/// min-distance annotations.
fn witness_point(ctx: &Ctx, row: &Evidence) -> Check<usize> {
    let [label] = row.witness.as_slice() else {
        return Err(format!("{:?} row needs exactly one witness point", row.kind));
    };
    let z = ctx.index(label)?;
    if z == ctx.x || z == ctx.y {
        return Err(format!("witness `{label}` is an endpoint of the pair"));
    }
    if let Some(e) = &row.excess {
        expect_eq("excess", e, &(ctx.through(z) - ctx.d(ctx.x, ctx.y)))?;
    }
    if let Some(m) = &row.min_distance {
        expect_eq("min-distance", m, &ctx.min_dist(z))?;
    }
    Ok(z)
}

fn level_integer(row: &Evidence) -> Check<Rational> {
    match &row.level {
        Some(n) if n.is_integer() && n.is_positive() => Ok(n.clone()),
        _ => Err(format!("{:?} row needs a positive integer level", row.kind)),
    }
}

fn level_positive(row: &Evidence) -> Check<Rational> {
    match &row.level {
        Some(e) if e.is_positive() => Ok(e.clone()),
        _ => Err(format!("{:?} row needs a positive level", row.kind)),
    }
}

fn coefficient(shape: &TailShape) -> Rational {
    match shape {
        TailShape::Uniform { excess_at_least } => excess_at_least.clone(),
        TailShape::Harmonic { c, .. } | TailShape::Branch { c } => c.clone(),
    }
}

fn check_row(ctx: &Ctx, cert: Option<&TailCertificate>, row: &Evidence) -> Check {
    let need_cert = || cert.ok_or_else(|| format!("{:?} row needs a tail certificate", row.kind));
    match row.kind {
        K::SegmentPoint | K::OffSegment => {
            let z = witness_point(ctx, row)?;
            expect_eq("d(x,z) + d(z,y)", &row.lhs, &ctx.through(z))?;
            expect_eq("d(x,y)", &row.rhs, &ctx.d(ctx.x, ctx.y))?;
            expect_rel(row, if row.kind == K::SegmentPoint { Cmp::Eq } else { Cmp::Gt })
        }
        K::DentingFailure => {
            let z = witness_point(ctx, row)?;
            expect_eq("min-distance", &row.lhs, &ctx.min_dist(z))?;
            expect_eq("eps", &row.rhs, &level_positive(row)?)?;
            expect_rel(row, Cmp::Ge)
        }
        K::DentingRow => {
            let eps = level_positive(row)?;
            let d = ctx.d(ctx.x, ctx.y);
            let mut delta = ctx
                .others()
                .filter(|&z| ctx.min_dist(z) >= eps)
                .map(|z| Rational::one() - &d / ctx.through(z))
                .min()
                .unwrap_or_else(Rational::one);
            if let Some(c) = cert {
                match c.excess_lower_bound(&eps) {
                    TailExcess::AtLeast(e) => delta = delta.min(&e / (&d + &e)),
                    TailExcess::NoQualifying => {}
                }
            }
            expect_eq("delta(eps)", &row.lhs, &delta)?;
            expect_eq("zero", &row.rhs, &Rational::zero())?;
            if !row.witness.is_empty() {
                witness_point(ctx, row)?;
            }
            expect_rel(row, Cmp::Gt)
        }
        K::ZWitness | K::ZFailure => {
            let z = witness_point(ctx, row)?;
            let n = level_integer(row)?;
            expect_eq("d(x,z) + d(y,z)", &row.lhs, &ctx.through(z))?;
            expect_eq("d(x,y) + min/n", &row.rhs, &(ctx.d(ctx.x, ctx.y) + ctx.min_dist(z) / n))?;
            expect_rel(row, if row.kind == K::ZWitness { Cmp::Le } else { Cmp::Gt })
        }
        K::TailStrict => {
            let c = need_cert()?;
            expect_eq("tail coefficient", &row.lhs, &coefficient(&c.shape))?;
            expect_rel(row, Cmp::Gt)
        }
        K::TailVanishing => {
            let c = need_cert()?;
            let TailShape::Harmonic { c: k, r, .. } = &c.shape else {
                return Err("vanishing tail needs a harmonic certificate".into());
            };
            if !k.is_positive() || !r.is_positive() {
                return Err("harmonic certificate must have positive coefficients".into());
            }
            expect_eq("min-distance floor", &row.lhs, r)?;
            expect_eq("eps", &row.rhs, &level_positive(row)?)?;
            expect_rel(row, Cmp::Ge)
        }
        K::TailRatio => {
            let c = need_cert()?;
            let TailShape::Uniform { excess_at_least } = &c.shape else {
                return Err("ratio bound needs a uniform certificate".into());
            };
            let n = level_integer(row)?;
            expect_eq("tail ratio bound", &row.lhs, &(excess_at_least / &c.diameter_bound))?;
            expect_eq("1/n", &row.rhs, &(Rational::one() / n))?;
            expect_rel(row, Cmp::Gt)
        }
        K::TailSchedule => {
            let c = need_cert()?;
            match &c.shape {
                TailShape::Harmonic { r, .. } if r.is_positive() => {}
                TailShape::Branch { .. } => {}
                _ => return Err("witness schedule needs a vanishing-ratio certificate".into()),
            }
            expect_eq("tail coefficient", &row.lhs, &coefficient(&c.shape))?;
            expect_rel(row, Cmp::Gt)
        }
        K::ExposureTie | K::ExposureGap => {
            if ctx.family.is_some() {
                return Err("exposure rows are only meaningful on finite spaces".into());
            }
            let f = |t: usize| {
                let (a, b) = (ctx.d(t, ctx.y), ctx.d(t, ctx.x));
                ctx.d(ctx.x, ctx.y) / int(2) * (&a - &b) / (a + b)
            };
            let pairing = |u: usize, v: usize| (f(u) - f(v)) / ctx.d(u, v);
            let [u, v] = row.witness.as_slice() else {
                return Err("exposure rows name a molecule by two labels".into());
            };
            let (u, v) = (ctx.index(u)?, ctx.index(v)?);
            if u == v || (u, v) == (ctx.x, ctx.y) {
                return Err("exposure witness must be a molecule other than m_xy".into());
            }
            expect_eq("pairing", &row.lhs, &pairing(u, v))?;
            expect_eq("one", &row.rhs, &Rational::one())?;
            if row.kind == K::ExposureGap {
                let n = ctx.space.len();
                let best = (0..n)
                    .flat_map(|a| (0..n).map(move |b| (a, b)))
                    .filter(|&(a, b)| a != b && (a, b) != (ctx.x, ctx.y))
                    .map(|(a, b)| pairing(a, b))
                    .max()
                    .expect("m_yx is always present");
                expect_eq("largest competing pairing", &row.lhs, &best)?;
                expect_rel(row, Cmp::Lt)
            } else {
                expect_rel(row, Cmp::Eq)
            }
        }
    }
}

fn covered(ctx: &Ctx, v: &Verdict, kind: K) -> Check {
    let seen: BTreeSet<usize> = v
        .rows(kind)
        .map(|r| witness_point(ctx, r))
        .collect::<Check<_>>()?;
    let want: BTreeSet<usize> = ctx.others().collect();
    if want.is_subset(&seen) {
        Ok(())
    } else {
        Err(format!("{kind:?} rows do not cover every point other than x and y"))
    }
}

fn has(v: &Verdict, kind: K) -> bool {
    v.rows(kind).next().is_some()
}

fn require(v: &Verdict, kind: K) -> Check {
    if has(v, kind) {
        Ok(())
    } else {
        Err(format!("a {} {:?} verdict needs a {kind:?} row", v.status, v.property))
    }
}

/// Sufficiency of the (Z) evidence for `has_z`.
fn check_z(ctx: &Ctx, v: &Verdict, has_z: bool) -> Check {
    if has_z {
        let levels: BTreeSet<Rational> = v.rows(K::ZWitness).filter_map(|r| r.level.clone()).collect();
        if levels.is_empty() {
            return Err("(Z) needs witness rows".into());
        }
        let top = levels.iter().max().expect("non-empty").clone();
        let complete = levels.len() as u64 == rational::floor_to_u64(&top);
        if !complete {
            return Err("(Z) witness levels must run 1, 2, ..., depth".into());
        }
        let constant = v.rows(K::ZWitness).any(|r| r.excess.as_ref().is_some_and(Zero::is_zero));
        if !constant && !(ctx.family.is_some() && has(v, K::TailSchedule)) {
            return Err("(Z) for every level needs a point of excess 0 or a tail schedule".into());
        }
        Ok(())
    } else {
        let levels: BTreeSet<Rational> = v
            .rows(K::ZFailure)
            .chain(v.rows(K::TailRatio))
            .filter_map(|r| r.level.clone())
            .collect();
        if levels.len() > 1 {
            return Err("(Z) failure rows must share one level".into());
        }
        covered(ctx, v, K::ZFailure)?;
        if ctx.family.is_some() {
            require(v, K::TailRatio)?;
        }
        Ok(())
    }
}

/// Re-verifies `verdict` against `space`.
pub fn check_verdict(space: &MetricSpace, verdict: &Verdict) -> Check {
    let x = space.point(&verdict.pair[0]).map_err(|e| e.to_string())?.0;
    let y = space.point(&verdict.pair[1]).map_err(|e| e.to_string())?.0;
    if x == y {
        return Err("verdict pair repeats a point".into());
    }
    let family = match space.kind() {
        SpaceKind::Gallery { family, n } => Some((*family, *n)),
        _ => None,
    };
    let ctx = Ctx { space, family, x, y };
    let expected = family.map(|(f, n)| f.certificate(x, y, n));
    if verdict.certificate != expected {
        return Err("certificate does not match the family's closed form for this pair".into());
    }
    if verdict.depth != family.map(|(_, n)| n) {
        return Err("recorded depth does not match the space".into());
    }
    let cert = expected.as_ref();
    if let Some(c) = cert {
        c.check_closed_form(DEEP_EXTRA)?;
    }
    for row in &verdict.evidence {
        check_row(&ctx, cert, row)?;
    }
    match verdict.status {
        Status::Inconclusive => {
            if family.is_none() {
                return Err("finite spaces are always decided".into());
            }
            Ok(())
        }
        status => {
            let proven = status == Status::Proven;
            match verdict.property {
                Property::Extreme if proven => {
                    covered(&ctx, verdict, K::OffSegment)?;
                    if family.is_some() {
                        require(verdict, K::TailStrict)?;
                    }
                    Ok(())
                }
                Property::Extreme => require(verdict, K::SegmentPoint),
                Property::Denting if proven => {
                    require(verdict, K::DentingRow)?;
                    covered(&ctx, verdict, K::OffSegment)?;
                    if family.is_some() {
                        require(verdict, K::TailStrict)?;
                    }
                    Ok(())
                }
                Property::Denting => {
                    let zero = verdict
                        .rows(K::DentingFailure)
                        .any(|r| r.excess.as_ref().is_some_and(Zero::is_zero));
                    if zero {
                        return Ok(());
                    }
                    require(verdict, K::TailVanishing)?;
                    let eps: BTreeSet<_> = verdict
                        .rows(K::TailVanishing)
                        .chain(verdict.rows(K::DentingFailure))
                        .filter_map(|r| r.level.clone())
                        .collect();
                    if eps.len() != 1 {
                        return Err("denting failure rows must share the tail's eps".into());
                    }
                    Ok(())
                }
                Property::PropertyZ => check_z(&ctx, verdict, proven),
                Property::StronglyExposed => check_z(&ctx, verdict, !proven),
                Property::ExposedByFxy => require(verdict, if proven { K::ExposureGap } else { K::ExposureTie }),
            }
        }
    }
}
