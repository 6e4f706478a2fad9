//! Finitely supported zero-sum measures and the Kantorovich–Rubinstein norm.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::extremal::oracle_extreme_points;
use crate::lipschitz::{self, check_slice_args, pair_molecule, LipFunction};
use crate::lp::{min_cost_flow, LinearProgram, LpOutcome, Relation};
use crate::metric::{MetricSpace, PointId};
use crate::rational::{self, Rational};

/// `mu = sum_x coeffs[x] delta(x)` stored densely in zero-sum normal form:
/// the base coefficient is always minus the sum of the others.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeElement {
    coeffs: Vec<Rational>,
    labels: Vec<String>,
    fingerprint: u64,
}

/// The molecule `m_xy = (delta(x) - delta(y)) / d(x,y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Molecule {
    pub x: PointId,
    pub y: PointId,
}

impl Molecule {
    pub fn new(space: &MetricSpace, x: PointId, y: PointId) -> Result<Self> {
        space.check_pair(x, y)?;
        Ok(Molecule { x, y })
    }

    pub fn element(self, space: &MetricSpace) -> FreeElement {
        FreeElement::molecule(space, self.x, self.y).expect("molecule endpoints are valid")
    }

    pub fn label(self, space: &MetricSpace) -> String {
        format!("m({},{})", space.label(self.x), space.label(self.y))
    }

    /// Every molecule of the space in lexicographic order of `(x, y)`.
    pub fn all(space: &MetricSpace) -> Vec<Molecule> {
        space.ordered_pairs().map(|(x, y)| Molecule { x, y }).collect()
    }
}

impl FreeElement {
    /// Normalizes `coeffs`; the base entry is ignored since `delta(base) = 0`.
    pub fn new(space: &MetricSpace, mut coeffs: Vec<Rational>) -> Result<Self> {
        if coeffs.len() != space.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                space.len(),
                coeffs.len()
            )));
        }
        coeffs[0] = -coeffs[1..].iter().sum::<Rational>();
        Ok(FreeElement { coeffs, labels: space.labels().to_vec(), fingerprint: space.fingerprint() })
    }

    pub fn zero(space: &MetricSpace) -> Self {
        Self::new(space, vec![Rational::zero(); space.len()]).expect("length matches")
    }

    pub fn delta(space: &MetricSpace, x: PointId) -> Result<Self> {
        if x.0 >= space.len() {
            return Err(Error::InvalidParameter(format!("point index {} out of range", x.0)));
        }
        let mut c = vec![Rational::zero(); space.len()];
        c[x.0] = Rational::one();
        Self::new(space, c)
    }

    pub fn molecule(space: &MetricSpace, x: PointId, y: PointId) -> Result<Self> {
        space.check_pair(x, y)?;
        let w = Rational::one() / space.d(x, y);
        let mut c = vec![Rational::zero(); space.len()];
        c[x.0] += &w;
        c[y.0] -= &w;
        Self::new(space, c)
    }

    /// Full coefficient vector including the base entry.
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, p: PointId) -> &Rational {
        &self.coeffs[p.0]
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.fingerprint == other.fingerprint && self.coeffs.len() == other.coeffs.len() {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.map2(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.map2(other, |a, b| a - b))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        FreeElement { coeffs: self.coeffs.iter().map(|a| a * c).collect(), ..self.clone() }
    }

    fn map2(&self, other: &Self, f: impl Fn(&Rational, &Rational) -> Rational) -> Self {
        FreeElement {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(a, b)).collect(),
            ..self.clone()
        }
    }

    /// Reads `{ "coeffs": { label: rational } }`.
    pub fn from_json(space: &MetricSpace, value: &serde_json::Value) -> Result<Self> {
        let map = value
            .get("coeffs")
            .and_then(|c| c.as_object())
            .ok_or_else(|| Error::Malformed {
                path: "coeffs".into(),
                message: "expected an object mapping labels to coefficients".into(),
            })?;
        let mut c = vec![Rational::zero(); space.len()];
        for (label, v) in map {
            let p = space.point(label).map_err(|_| Error::Malformed {
                path: format!("coeffs.{label}"),
                message: format!("`{label}` is not a point of the space"),
            })?;
            c[p.0] = rational::from_json(v).map_err(|e| e.at(&format!("coeffs.{label}")))?;
        }
        Self::new(space, c)
    }
}

impl Serialize for FreeElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Coeffs<'a>(&'a FreeElement);
        impl Serialize for Coeffs<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let nz: Vec<_> = self.0.labels.iter().zip(&self.0.coeffs).filter(|(_, c)| !c.is_zero()).collect();
                let mut map = s.serialize_map(Some(nz.len()))?;
                for (label, c) in nz {
                    map.serialize_entry(label, &rational::format(c))?;
                }
                map.end()
            }
        }
        let mut map = s.serialize_map(Some(1))?;
        map.serialize_entry("coeffs", &Coeffs(self))?;
        map.end()
    }
}

fn check_element(space: &MetricSpace, mu: &FreeElement) -> Result<()> {
    if mu.fingerprint != space.fingerprint() || mu.coeffs.len() != space.len() {
        return Err(Error::SpaceMismatch);
    }
    Ok(())
}

/// `sup { <f, mu> : ||f||_L <= 1 }` by the exact simplex, with an
/// optimal 1-Lipschitz witness.
///
/// Variables are `g = f + d(., 0) >= 0` on the non-base points, so the
/// constraints `|f(u) - f(v)| <= d(u,v)` and `|f(u)| <= d(u,0)` all have
/// non-negative right-hand sides on a metric.
pub fn kr_norm_dual(space: &MetricSpace, mu: &FreeElement) -> Result<(Rational, LipFunction)> {
    check_element(space, mu)?;
    let n = space.len();
    if n == 1 {
        return Ok((Rational::zero(), LipFunction::zero(space)));
    }
    let k = n - 1;
    let base = PointId::BASE;
    let mut lp = LinearProgram::new(k);
    lp.objective = (1..n).map(|u| mu.coeffs[u].clone()).collect();
    for u in 1..n {
        for v in 1..n {
            if u == v {
                continue;
            }
            let mut row = vec![Rational::zero(); k];
            row[u - 1] = Rational::one();
            row[v - 1] = -Rational::one();
            let (pu, pv) = (PointId(u), PointId(v));
            lp.add(row, Relation::Le, space.d(pu, pv) + space.d(pu, base) - space.d(pv, base));
        }
        let mut row = vec![Rational::zero(); k];
        row[u - 1] = Rational::one();
        lp.add(row, Relation::Le, space.d(PointId(u), base) * rational::int(2));
    }
    match lp.solve() {
        LpOutcome::Optimal { x, .. } => {
            let mut values = vec![Rational::zero(); n];
            for u in 1..n {
                values[u] = &x[u - 1] - space.d(PointId(u), base);
            }
            let f = LipFunction::new(space, values)?;
            let value = lipschitz::pair(&f, mu)?;
            Ok((value, f))
        }
        other => Err(Error::Invariant(format!("dual program is always feasible and bounded, got {other:?}"))),
    }
}

/// One arc of an optimal transport plan.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransportArc {
    pub from: String,
    pub to: String,
    #[serde(with = "rational::serde_rational")]
    pub mass: Rational,
}

/// `min sum c(u,v) d(u,v)` over non-negative flows with divergence `mu`,
/// solved as an integer min-cost flow after clearing denominators.
pub fn kr_norm_primal(space: &MetricSpace, mu: &FreeElement) -> Result<(Rational, Vec<TransportArc>)> {
    check_element(space, mu)?;
    let mass_scale = rational::lcm_of_denominators(mu.coeffs.iter());
    let dist_scale = rational::lcm_of_denominators(space.matrix().iter().flatten());
    let supply: Vec<BigInt> = mu
        .coeffs
        .iter()
        .map(|c| (c * Rational::from_integer(mass_scale.clone())).to_integer())
        .collect();
    let cost: Vec<Vec<BigInt>> = space
        .matrix()
        .iter()
        .map(|row| {
            row.iter()
                .map(|d| (d * Rational::from_integer(dist_scale.clone())).to_integer())
                .collect()
        })
        .collect();
    if cost.iter().flatten().any(|c| c.is_negative()) {
        return Err(Error::InvalidParameter("transport needs non-negative distances".into()));
    }
    let sol = min_cost_flow(&supply, &cost);
    let value = Rational::new(sol.cost, &mass_scale * &dist_scale);
    let plan = sol
        .arcs
        .into_iter()
        .map(|a| TransportArc {
            from: space.labels()[a.from].clone(),
            to: space.labels()[a.to].clone(),
            mass: Rational::new(a.amount, mass_scale.clone()),
        })
        .collect();
    Ok((value, plan))
}

/// `||m1 - m2||`.
pub fn molecule_distance(space: &MetricSpace, m1: Molecule, m2: Molecule) -> Result<Rational> {
    if m1 == m2 {
        return Ok(Rational::zero());
    }
    let diff = FreeElement::molecule(space, m1.x, m1.y)?.sub(&FreeElement::molecule(space, m2.x, m2.y)?)?;
    Ok(kr_norm_primal(space, &diff)?.0)
}

/// Diameter of the slice `{ mu in B : <f, mu> > 1 - alpha }`.
///
/// Restricted to molecules this is the largest pairwise molecule distance
/// inside the slice. Otherwise the closed slice is the polytope
/// `B ∩ {f >= 1 - alpha}`; its vertices are among the ball vertices above the
/// level and the points where a segment between two ball vertices crosses
/// it, and the diameter of a polytope is attained at two vertices.
pub fn slice_diameter(space: &MetricSpace, f: &LipFunction, alpha: &Rational, restrict_to_molecules: bool) -> Result<Rational> {
    check_slice_args(space, f, alpha)?;
    let level = Rational::one() - alpha;
    if restrict_to_molecules {
        let slice = lipschitz::slice_molecules(space, f, alpha)?;
        let mut best = Rational::zero();
        for (i, &a) in slice.iter().enumerate() {
            for &b in &slice[i + 1..] {
                let d = molecule_distance(space, a, b)?;
                if d > best {
                    best = d;
                }
            }
        }
        return Ok(best);
    }
    if lipschitz::lip_norm(space, f)?.value <= level {
        return Ok(Rational::zero());
    }
    let vertices = oracle_extreme_points(space)?;
    let valued: Vec<(FreeElement, Rational)> = vertices
        .iter()
        .map(|&m| (m.element(space), pair_molecule(space, f, m)))
        .collect();
    let mut candidates: Vec<FreeElement> = valued
        .iter()
        .filter(|(_, v)| *v >= level)
        .map(|(e, _)| e.clone())
        .collect();
    for (hi, fh) in valued.iter().filter(|(_, v)| *v > level) {
        for (lo, fl) in valued.iter().filter(|(_, v)| *v < level) {
            // t hi + (1 - t) lo with value exactly `level`
            let t = (&level - fl) / (fh - fl);
            candidates.push(hi.scale(&t).add(&lo.scale(&(Rational::one() - &t)))?);
        }
    }
    let mut best = Rational::zero();
    for (i, a) in candidates.iter().enumerate() {
        for b in &candidates[i + 1..] {
            let d = kr_norm_primal(space, &a.sub(b)?)?.0;
            if d > best {
                best = d;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lipschitz::build_f_xy;
    use crate::metric::fixtures::{square, two_point};
    use crate::rational::{int, ratio};

    #[test]
    fn molecules_have_norm_one() {
        let s = square();
        for m in Molecule::all(&s) {
            let e = m.element(&s);
            let (dual, f) = kr_norm_dual(&s, &e).unwrap();
            assert_eq!(dual, int(1));
            assert!(lipschitz::lip_norm(&s, &f).unwrap().value <= int(1));
            assert_eq!(kr_norm_primal(&s, &e).unwrap().0, int(1));
        }
    }

    #[test]
    fn deltas_are_isometric() {
        let s = square();
        for x in s.points() {
            let e = FreeElement::delta(&s, x).unwrap();
            assert_eq!(kr_norm_dual(&s, &e).unwrap().0, s.d(x, PointId::BASE).clone());
        }
    }

    #[test]
    fn two_unit_masses_leave_the_base() {
        let s = square();
        let mut c = vec![int(0); 4];
        c[s.point("a").unwrap().0] = int(1);
        c[s.point("c").unwrap().0] = int(1);
        let mu = FreeElement::new(&s, c).unwrap();
        assert_eq!(mu.coeff(PointId::BASE), &int(-2));
        let (primal, plan) = kr_norm_primal(&s, &mu).unwrap();
        assert_eq!(primal, int(2));
        assert_eq!(plan.len(), 2);
        assert_eq!(kr_norm_dual(&s, &mu).unwrap().0, int(2));
    }

    #[test]
    fn single_arc_plan_for_a_molecule() {
        let s = MetricSpace::new(
            vec!["0".into(), "a".into()],
            vec![vec![int(0), ratio(5, 2)], vec![ratio(5, 2), int(0)]],
        )
        .unwrap();
        let (x, y) = (s.point("a").unwrap(), PointId::BASE);
        let (v, plan) = kr_norm_primal(&s, &FreeElement::molecule(&s, x, y).unwrap()).unwrap();
        assert_eq!(v, int(1));
        assert_eq!(plan, vec![TransportArc { from: "a".into(), to: "0".into(), mass: ratio(2, 5) }]);
        assert_eq!(kr_norm_primal(&s, &FreeElement::zero(&s)).unwrap().0, int(0));
    }

    #[test]
    fn opposite_molecules_are_two_apart() {
        let s = square();
        for m in Molecule::all(&s) {
            assert_eq!(molecule_distance(&s, m, m).unwrap(), int(0));
            assert_eq!(molecule_distance(&s, m, Molecule { x: m.y, y: m.x }).unwrap(), int(2));
        }
    }

    #[test]
    fn mismatched_spaces_are_rejected() {
        let (s, t) = (square(), two_point());
        let e = FreeElement::delta(&t, PointId(1)).unwrap();
        assert_eq!(kr_norm_dual(&s, &e), Err(Error::SpaceMismatch));
        assert_eq!(lipschitz::pair(&LipFunction::zero(&s), &e), Err(Error::SpaceMismatch));
        assert_eq!(e.add(&FreeElement::zero(&s)), Err(Error::SpaceMismatch));
    }

    #[test]
    fn slice_of_a_single_molecule_has_diameter_zero() {
        let s = square();
        let (x, y) = (PointId::BASE, s.point("a").unwrap());
        let f = build_f_xy(&s, x, y).unwrap();
        assert_eq!(slice_diameter(&s, &f, &ratio(1, 100), true).unwrap(), int(0));
    }

    #[test]
    fn full_slice_shrinks_around_an_exposed_molecule() {
        let s = square();
        let (x, y) = (PointId::BASE, s.point("a").unwrap());
        let f = build_f_xy(&s, x, y).unwrap();
        let diams: Vec<Rational> = [2, 4, 8, 16]
            .iter()
            .map(|&k| slice_diameter(&s, &f, &ratio(1, k), false).unwrap())
            .collect();
        assert!(diams.windows(2).all(|w| w[1] <= w[0]), "{diams:?}");
        assert!(diams[3] < diams[0]);
    }

    #[test]
    fn json_includes_base_coefficient() {
        let s = square();
        let mu = FreeElement::delta(&s, s.point("b").unwrap()).unwrap();
        let v = serde_json::to_value(&mu).unwrap();
        assert_eq!(v, serde_json::json!({"coeffs": {"0": "-1", "b": "1"}}));
        assert_eq!(FreeElement::from_json(&s, &v).unwrap(), mu);
        let bad = serde_json::json!({"coeffs": {"q": 1}});
        assert!(matches!(FreeElement::from_json(&s, &bad), Err(Error::Malformed { .. })));
    }
}
