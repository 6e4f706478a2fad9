//! Lipschitz functions vanishing at the base point, their norms and
//! pairings, and the special functions used to probe the unit ball.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::free_space::{FreeElement, Molecule};
use crate::metric::{MetricSpace, PointId};
use crate::rational::{self, int, Rational};

/// A function on every point of a space, zero at the base point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LipFunction {
    values: Vec<Rational>,
    labels: Vec<String>,
    fingerprint: u64,
}

impl LipFunction {
    pub fn new(space: &MetricSpace, values: Vec<Rational>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                space.len(),
                values.len()
            )));
        }
        if !values[0].is_zero() {
            return Err(Error::InvalidParameter(format!(
                "value at the base point must be 0, got {}",
                rational::format(&values[0])
            )));
        }
        Ok(Self::unchecked(space, values))
    }

    /// Subtracts the base value from every entry.
    pub fn shifted(space: &MetricSpace, mut values: Vec<Rational>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("no values given".into()));
        }
        let base = values[0].clone();
        for v in values.iter_mut() {
            *v -= &base;
        }
        Self::new(space, values)
    }

    pub fn zero(space: &MetricSpace) -> Self {
        Self::unchecked(space, vec![Rational::zero(); space.len()])
    }

    fn unchecked(space: &MetricSpace, values: Vec<Rational>) -> Self {
        LipFunction { values, labels: space.labels().to_vec(), fingerprint: space.fingerprint() }
    }

    pub fn value(&self, p: PointId) -> &Rational {
        &self.values[p.0]
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    pub fn check_space(&self, space: &MetricSpace) -> Result<()> {
        if self.fingerprint == space.fingerprint() {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    /// Reads `{ label: rational }`. A missing base point means 0; every
    /// other point must be present.
    pub fn from_json(space: &MetricSpace, value: &serde_json::Value) -> Result<Self> {
        let map = value.as_object().ok_or_else(|| Error::Malformed {
            path: String::new(),
            message: "a function is a JSON object mapping labels to values".into(),
        })?;
        for key in map.keys() {
            space.point(key).map_err(|_| Error::Malformed {
                path: key.clone(),
                message: format!("`{key}` is not a point of the space"),
            })?;
        }
        let values = space
            .labels()
            .iter()
            .enumerate()
            .map(|(i, label)| match map.get(label) {
                Some(v) => rational::from_json(v).map_err(|e| e.at(label)),
                None if i == 0 => Ok(Rational::zero()),
                None => Err(Error::Malformed {
                    path: label.clone(),
                    message: "missing value".into(),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, values).map_err(|e| match e {
            Error::InvalidParameter(message) => Error::Malformed { path: space.labels()[0].clone(), message },
            other => other,
        })
    }
}

impl Serialize for LipFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.values.len()))?;
        for (label, v) in self.labels.iter().zip(&self.values) {
            map.serialize_entry(label, &rational::format(v))?;
        }
        map.end()
    }
}

/// Values on a subset of the points, to be extended to the whole space.
#[derive(Clone, Debug)]
pub struct PartialFunction {
    pub values: BTreeMap<PointId, Rational>,
}

impl PartialFunction {
    pub fn new(values: impl IntoIterator<Item = (PointId, Rational)>) -> Self {
        PartialFunction { values: values.into_iter().collect() }
    }

    /// Lipschitz constant of the restriction.
    pub fn lipschitz_constant(&self, space: &MetricSpace) -> Rational {
        let pts: Vec<_> = self.values.iter().collect();
        let mut best = Rational::zero();
        for (i, (u, fu)) in pts.iter().enumerate() {
            for (v, fv) in &pts[i + 1..] {
                let q = (*fu - *fv).abs() / space.d(**u, **v);
                if q > best {
                    best = q;
                }
            }
        }
        best
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LipNorm {
    pub value: Rational,
    /// First pair `u < v` (lexicographic) realizing the norm; `None` for the
    /// zero function.
    pub argmax: Option<(PointId, PointId)>,
}

pub fn lip_norm(space: &MetricSpace, f: &LipFunction) -> Result<LipNorm> {
    f.check_space(space)?;
    space.has_molecules()?;
    let mut best = Rational::zero();
    let mut argmax = None;
    for u in space.points() {
        for v in space.points().skip(u.0 + 1) {
            let q = (f.value(u) - f.value(v)).abs() / space.d(u, v);
            if q > best {
                best = q;
                argmax = Some((u, v));
            }
        }
    }
    Ok(LipNorm { value: best, argmax })
}

/// `<f, mu> = sum_x mu(x) f(x)`.
pub fn pair(f: &LipFunction, mu: &FreeElement) -> Result<Rational> {
    if f.fingerprint != mu.fingerprint() {
        return Err(Error::SpaceMismatch);
    }
    Ok(f.values.iter().zip(mu.coeffs()).map(|(a, b)| a * b).sum())
}

/// `<f, m_uv> = (f(u) - f(v)) / d(u,v)` without building the molecule.
pub fn pair_molecule(space: &MetricSpace, f: &LipFunction, m: Molecule) -> Rational {
    (f.value(m.x) - f.value(m.y)) / space.d(m.x, m.y)
}

/// `t -> d(x,y)/2 * (d(t,y) - d(t,x)) / (d(t,y) + d(t,x))`, shifted to
/// vanish at the base point.
pub fn build_f_xy(space: &MetricSpace, x: PointId, y: PointId) -> Result<LipFunction> {
    space.check_pair(x, y)?;
    let half = space.d(x, y) / int(2);
    let values = space
        .points()
        .map(|t| {
            let (a, b) = (space.d(t, y), space.d(t, x));
            &half * (a - b) / (a + b)
        })
        .collect();
    LipFunction::shifted(space, values)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FdentScale {
    /// Reject pairs with `d(x,y) != 1`.
    RequireUnit,
    /// Divide all distances by `d(x,y)`, build, then scale the values back.
    Rescale,
}

/// The slice-controlling function for the pair `(x,y)`.
///
/// With `d(x,y) = 1` and `k = 1 / (1 + 4 eps tau)` it takes the values
/// `k (tau + (1 - tau) d(y,t))` on the closed ball `B(x,eps)` and
/// `k (1 - tau) d(y,t)` on `B(y,eps)`, and is extended to the whole space by
/// [`mcshane_extend`] with the Lipschitz constant of that restriction.
pub fn build_fdent(
    space: &MetricSpace,
    x: PointId,
    y: PointId,
    eps: &Rational,
    tau: &Rational,
    scale: FdentScale,
) -> Result<LipFunction> {
    space.check_pair(x, y)?;
    if !eps.is_positive() || eps >= &rational::ratio(1, 4) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0,1/4), got {}",
            rational::format(eps)
        )));
    }
    if !tau.is_positive() || tau >= &Rational::one() {
        return Err(Error::InvalidParameter(format!(
            "tau must lie in (0,1), got {}",
            rational::format(tau)
        )));
    }
    let unit = space.d(x, y).clone();
    if !unit.is_one() && scale == FdentScale::RequireUnit {
        return Err(Error::InvalidParameter(format!(
            "d(x,y) must be 1, got {}",
            rational::format(&unit)
        )));
    }
    // distances measured in units of d(x,y)
    let du = |a: PointId, b: PointId| space.d(a, b) / &unit;
    let near_x: Vec<PointId> = space.points().filter(|&t| du(x, t) <= *eps).collect();
    let near_y: Vec<PointId> = space.points().filter(|&t| du(y, t) <= *eps).collect();
    if near_x.iter().any(|t| near_y.contains(t)) {
        return Err(Error::InvalidParameter("the balls around x and y intersect".into()));
    }
    let k = Rational::one() / (Rational::one() + int(4) * eps * tau);
    let rest = Rational::one() - tau;
    let partial = PartialFunction::new(
        near_x
            .iter()
            .map(|&t| (t, &k * (tau + &rest * du(y, t))))
            .chain(near_y.iter().map(|&t| (t, &k * &rest * du(y, t)))),
    );
    // extend in the rescaled metric, then return to the original units
    let lip = partial.lipschitz_constant(space) * &unit;
    let values: Vec<Rational> = space
        .points()
        .map(|t| {
            partial
                .values
                .iter()
                .map(|(s, fs)| fs + &lip * du(t, *s))
                .min()
                .expect("x lies in its own ball")
                * &unit
        })
        .collect();
    LipFunction::shifted(space, values)
}

/// The extension of a partial function and the constant it was built with.
#[derive(Clone, Debug)]
pub struct Extension {
    pub function: LipFunction,
    pub constant: Rational,
}

/// McShane extension `F(t) = min_s partial(s) + L d(t,s)` with `L` the
/// Lipschitz constant of `partial`. Base-shifted when `shift_base` is set;
/// otherwise the base value must already be 0.
pub fn mcshane_extend(space: &MetricSpace, partial: &PartialFunction, shift_base: bool) -> Result<Extension> {
    if partial.values.is_empty() {
        return Err(Error::InvalidParameter("cannot extend from an empty domain".into()));
    }
    if let Some(p) = partial.values.keys().find(|p| p.0 >= space.len()) {
        return Err(Error::InvalidParameter(format!("point index {} out of range", p.0)));
    }
    let lip = partial.lipschitz_constant(space);
    let values: Vec<Rational> = space
        .points()
        .map(|t| {
            partial
                .values
                .iter()
                .map(|(s, fs)| fs + &lip * space.d(t, *s))
                .min()
                .expect("domain is non-empty")
        })
        .collect();
    let function = if shift_base {
        LipFunction::shifted(space, values)?
    } else {
        LipFunction::new(space, values)?
    };
    Ok(Extension { function, constant: lip })
}

/// `f_xy + eps * 1_z`.
///
/// Accepted when `eps >= 0` and `(1 - eps/theta) (d(x,z) + d(z,y)) >= d(x,y)`
/// with `theta = min_{u != z} d(u,z)`; together with the pairing bound of
/// `f_xy` this keeps the Lipschitz norm at most 1.
pub fn build_g(space: &MetricSpace, x: PointId, y: PointId, z: PointId, eps: &Rational) -> Result<LipFunction> {
    space.check_pair(x, y)?;
    if z.0 >= space.len() || z == x || z == y {
        return Err(Error::InvalidParameter("z must be a point different from x and y".into()));
    }
    if eps.is_negative() {
        return Err(Error::InvalidParameter(format!(
            "eps must be non-negative, got {}",
            rational::format(eps)
        )));
    }
    let theta = space
        .points()
        .filter(|&u| u != z)
        .map(|u| space.d(u, z).clone())
        .min()
        .expect("space has at least three points");
    let through_z = space.d(x, z) + space.d(z, y);
    if (Rational::one() - eps / &theta) * &through_z < *space.d(x, y) {
        return Err(Error::InvalidParameter(format!(
            "eps = {} is too large for z = {}: need (1 - eps/{}) * {} >= {}",
            rational::format(eps),
            space.label(z),
            rational::format(&theta),
            rational::format(&through_z),
            rational::format(space.d(x, y))
        )));
    }
    let mut values = build_f_xy(space, x, y)?.values;
    values[z.0] += eps;
    LipFunction::shifted(space, values)
}

/// Molecules `m_uv` with `<f, m_uv> > 1 - alpha`, in lexicographic order.
pub fn slice_molecules(space: &MetricSpace, f: &LipFunction, alpha: &Rational) -> Result<Vec<Molecule>> {
    check_slice_args(space, f, alpha)?;
    let level = Rational::one() - alpha;
    Ok(space
        .ordered_pairs()
        .map(|(u, v)| Molecule { x: u, y: v })
        .filter(|&m| pair_molecule(space, f, m) > level)
        .collect())
}

pub(crate) fn check_slice_args(space: &MetricSpace, f: &LipFunction, alpha: &Rational) -> Result<()> {
    if !alpha.is_positive() || alpha > &Rational::one() {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0,1], got {}",
            rational::format(alpha)
        )));
    }
    let norm = lip_norm(space, f)?.value;
    if norm > Rational::one() {
        return Err(Error::InvalidParameter(format!(
            "slices need a function of norm at most 1, got {}",
            rational::format(&norm)
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::fixtures::{square, two_point};
    use crate::metric::{gallery, metric_segment};
    use crate::rational::ratio;

    fn ids(s: &MetricSpace, a: &str, b: &str) -> (PointId, PointId) {
        (s.point(a).unwrap(), s.point(b).unwrap())
    }

    #[test]
    fn distance_to_base_has_norm_one() {
        let s = square();
        let f = LipFunction::new(&s, s.points().map(|t| s.d(t, PointId::BASE).clone()).collect()).unwrap();
        let n = lip_norm(&s, &f).unwrap();
        assert_eq!(n.value, int(1));
        assert_eq!(n.argmax, Some(ids(&s, "0", "a")));
    }

    #[test]
    fn zero_function_has_no_argmax() {
        let s = square();
        let n = lip_norm(&s, &LipFunction::zero(&s)).unwrap();
        assert_eq!(n, LipNorm { value: int(0), argmax: None });
        let one = MetricSpace::from_integers(&["0"], &[&[0]]).unwrap();
        assert_eq!(lip_norm(&one, &LipFunction::zero(&one)), Err(Error::EmptySpace));
    }

    #[test]
    fn f_xy_pairs_to_one_on_its_molecule() {
        let s = square();
        for (x, y) in s.ordered_pairs() {
            let f = build_f_xy(&s, x, y).unwrap();
            assert_eq!(f.value(x) - f.value(y), s.d(x, y).clone());
            assert_eq!(pair_molecule(&s, &f, Molecule { x, y }), int(1));
            assert!(lip_norm(&s, &f).unwrap().value <= int(1));
        }
        let (o, _) = ids(&s, "0", "a");
        assert!(matches!(build_f_xy(&s, o, o), Err(Error::InvalidPair(_))));
    }

    #[test]
    fn f_xy_pairing_bound_on_square() {
        let s = square();
        for (x, y) in s.ordered_pairs() {
            let f = build_f_xy(&s, x, y).unwrap();
            for (u, v) in s.ordered_pairs() {
                let p = pair_molecule(&s, &f, Molecule { x: u, y: v });
                let far = (s.d(x, u) + s.d(u, y)).max(s.d(x, v) + s.d(v, y));
                assert!(p <= s.d(x, y) / far);
                if p == int(1) {
                    let seg = metric_segment(&s, x, y).unwrap();
                    assert!(seg.contains(&u) && seg.contains(&v));
                }
            }
        }
    }

    #[test]
    fn fdent_on_two_points_is_linear() {
        // base 0 plays y, a plays x
        let s = two_point();
        let (y, x) = ids(&s, "0", "a");
        let (eps, tau) = (ratio(1, 8), ratio(1, 2));
        let f = build_fdent(&s, x, y, &eps, &tau, FdentScale::RequireUnit).unwrap();
        let k = Rational::one() / (Rational::one() + int(4) * &eps * &tau);
        assert_eq!(pair_molecule(&s, &f, Molecule { x, y }), k.clone());
        assert_eq!(lip_norm(&s, &f).unwrap().value, k);
    }

    #[test]
    fn fdent_rescales_or_rejects_non_unit_pairs() {
        let s = square();
        let (x, y) = ids(&s, "0", "b");
        let (eps, tau) = (ratio(1, 5), ratio(1, 3));
        assert!(matches!(
            build_fdent(&s, x, y, &eps, &tau, FdentScale::RequireUnit),
            Err(Error::InvalidParameter(_))
        ));
        let f = build_fdent(&s, x, y, &eps, &tau, FdentScale::Rescale).unwrap();
        let k = Rational::one() / (Rational::one() + int(4) * &eps * &tau);
        assert_eq!(pair_molecule(&s, &f, Molecule { x, y }), k);
        assert!(lip_norm(&s, &f).unwrap().value <= int(1));
        for bad in [int(0), ratio(1, 4)] {
            assert!(build_fdent(&s, x, y, &bad, &tau, FdentScale::Rescale).is_err());
        }
    }

    #[test]
    fn mcshane_keeps_values_and_constant() {
        let s = square();
        let (x, y) = ids(&s, "a", "c");
        let partial = PartialFunction::new([(x, s.d(x, y).clone()), (y, int(0))]);
        let ext = mcshane_extend(&s, &partial, true).unwrap();
        assert_eq!(ext.constant, int(1));
        assert_eq!(lip_norm(&s, &ext.function).unwrap().value, int(1));
        assert_eq!(ext.function.value(x) - ext.function.value(y), int(2));

        let all = PartialFunction::new(s.points().map(|t| (t, s.d(t, PointId::BASE).clone())));
        let same = mcshane_extend(&s, &all, false).unwrap();
        assert_eq!(same.function.values(), all.values.values().cloned().collect::<Vec<_>>());
        assert!(mcshane_extend(&s, &PartialFunction::new([]), true).is_err());
    }

    #[test]
    fn mcshane_on_nondual_fdent_partial() {
        let s = gallery("nondual", 6).unwrap();
        let (x, y) = ids(&s, "a", "1");
        let unit = s.d(x, y).clone();
        let (eps, tau) = (ratio(1, 5), ratio(1, 2));
        let k = Rational::one() / (Rational::one() + int(4) * &eps * &tau);
        let partial = PartialFunction::new(s.points().filter_map(|t| {
            let (dx, dy) = (s.d(x, t) / &unit, s.d(y, t) / &unit);
            if dx <= eps {
                Some((t, &k * (&tau + (Rational::one() - &tau) * &dy)))
            } else if dy <= eps {
                Some((t, &k * (Rational::one() - &tau) * &dy))
            } else {
                None
            }
        }));
        let ext = mcshane_extend(&s, &partial, true).unwrap();
        assert_eq!(lip_norm(&s, &ext.function).unwrap().value, ext.constant);
    }

    #[test]
    fn g_on_square() {
        let s = square();
        let (x, y) = ids(&s, "0", "b");
        let z = s.point("a").unwrap();
        let g = build_g(&s, x, y, z, &int(0)).unwrap();
        assert_eq!(g, build_f_xy(&s, x, y).unwrap());
        assert!(lip_norm(&s, &g).unwrap().value <= int(1));
        // a lies on the segment, so any positive bump breaks the norm bound
        assert!(matches!(build_g(&s, x, y, z, &ratio(1, 2)), Err(Error::InvalidParameter(_))));

        let (x, y) = ids(&s, "0", "a");
        let z = s.point("b").unwrap();
        let g = build_g(&s, x, y, z, &ratio(2, 3)).unwrap();
        assert!(lip_norm(&s, &g).unwrap().value <= int(1));
        assert_eq!(pair_molecule(&s, &g, Molecule { x, y }), int(1));
    }

    #[test]
    fn slices_grow_with_alpha() {
        let s = square();
        let (x, y) = ids(&s, "0", "a");
        let f = build_f_xy(&s, x, y).unwrap();
        let thin = slice_molecules(&s, &f, &ratio(1, 100)).unwrap();
        assert_eq!(thin, vec![Molecule { x, y }]);
        let all = slice_molecules(&s, &f, &int(1)).unwrap();
        assert!(all.iter().all(|&m| pair_molecule(&s, &f, m) > int(0)));
        assert!(thin.iter().all(|m| all.contains(m)));
    }

    #[test]
    fn json_round_trip_and_errors() {
        let s = square();
        let (x, y) = ids(&s, "a", "c");
        let f = build_f_xy(&s, x, y).unwrap();
        let v = serde_json::to_value(&f).unwrap();
        assert_eq!(LipFunction::from_json(&s, &v).unwrap(), f);
        let missing = serde_json::json!({"a": "1"});
        assert!(matches!(LipFunction::from_json(&s, &missing), Err(Error::Malformed { .. })));
        let nonzero = serde_json::json!({"0": 1, "a": 1, "b": 1, "c": 1});
        assert!(matches!(LipFunction::from_json(&s, &nonzero), Err(Error::Malformed { .. })));
    }
}
