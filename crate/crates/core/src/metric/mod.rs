//! Pointed finite metric spaces with exact rational distances.

mod gallery;
mod io;
mod random;
mod snowflake;

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub use gallery::{
    certificate_for, gallery, Family, TailCertificate, TailExcess, TailShape,
};
pub use io::{load_space, parse_space, space_to_json, SpaceFile};
pub use random::{random_space, RandomSpaceStyle};
pub use snowflake::{concavity_margin, snowflake, SNOWFLAKE_TOLERANCE};

/// Index of a point inside its [`MetricSpace`]. Index 0 is the base point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointId(pub usize);

impl PointId {
    pub const BASE: PointId = PointId(0);

    pub fn index(self) -> usize {
        self.0
    }

    pub fn is_base(self) -> bool {
        self.0 == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    Finite,
    /// Truncation of a countable gallery family to the base point plus its
    /// first `n` family points.
    Gallery { family: Family, n: usize },
    /// Power transform `d^p` of another space. `exact` is true when every
    /// entry is the exact power rather than a rational approximation.
    Snowflake { exponent: Rational, exact: bool },
}

impl SpaceKind {
    pub fn arithmetic_mode(&self) -> &'static str {
        match self {
            SpaceKind::Snowflake { exact: false, .. } => "float",
            _ => "exact",
        }
    }
}

#[derive(Clone, Debug)]
pub struct MetricSpace {
    labels: Vec<String>,
    dist: Vec<Vec<Rational>>,
    kind: SpaceKind,
    index: HashMap<String, usize>,
    fingerprint: u64,
}

impl PartialEq for MetricSpace {
    fn eq(&self, other: &Self) -> bool {
        self.fingerprint == other.fingerprint
            && self.labels == other.labels
            && self.dist == other.dist
            && self.kind == other.kind
    }
}

impl MetricSpace {
    /// Builds a finite space. The first label is the base point. Metric
    /// axioms are not enforced here; see [`validate`].
    pub fn new(labels: Vec<String>, dist: Vec<Vec<Rational>>) -> Result<Self> {
        Self::with_kind(labels, dist, SpaceKind::Finite)
    }

    pub fn with_kind(labels: Vec<String>, dist: Vec<Vec<Rational>>, kind: SpaceKind) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidParameter("a space needs at least the base point".into()));
        }
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidParameter(format!(
                "distance matrix must be {n}x{n} to match the point list"
            )));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate point label `{label}`")));
            }
        }
        let mut hasher = DefaultHasher::new();
        labels.hash(&mut hasher);
        dist.hash(&mut hasher);
        kind.hash(&mut hasher);
        Ok(MetricSpace {
            labels,
            dist,
            kind,
            index,
            fingerprint: hasher.finish(),
        })
    }

    /// Convenience constructor from integer-valued distances.
    pub fn from_integers(labels: &[&str], dist: &[&[i64]]) -> Result<Self> {
        let dist = dist
            .iter()
            .map(|row| row.iter().map(|&v| rational::int(v)).collect())
            .collect();
        Self::new(labels.iter().map(|s| s.to_string()).collect(), dist)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, p: PointId) -> &str {
        &self.labels[p.0]
    }

    pub fn point(&self, label: &str) -> Result<PointId> {
        self.index
            .get(label)
            .map(|&i| PointId(i))
            .ok_or_else(|| Error::UnknownPoint(label.to_string()))
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> + '_ {
        (0..self.len()).map(PointId)
    }

    pub fn d(&self, a: PointId, b: PointId) -> &Rational {
        &self.dist[a.0][b.0]
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.dist
    }

    /// All ordered pairs `(u, v)` with `u != v`, in lexicographic order.
    pub fn ordered_pairs(&self) -> impl Iterator<Item = (PointId, PointId)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |u| (0..n).filter(move |&v| v != u).map(move |v| (PointId(u), PointId(v))))
    }

    pub fn check_pair(&self, x: PointId, y: PointId) -> Result<()> {
        let n = self.len();
        if x.0 >= n || y.0 >= n {
            return Err(Error::InvalidPair(format!(
                "point index out of range for a space of {n} points"
            )));
        }
        if x == y {
            return Err(Error::InvalidPair(format!(
                "x and y must differ (both are `{}`)",
                self.label(x)
            )));
        }
        Ok(())
    }

    /// `d(x,z) + d(z,y) - d(x,y)`; zero exactly when `z` lies on the segment.
    pub fn excess(&self, x: PointId, y: PointId, z: PointId) -> Rational {
        self.d(x, z) + self.d(z, y) - self.d(x, y)
    }

    pub fn has_molecules(&self) -> Result<()> {
        if self.len() < 2 {
            Err(Error::EmptySpace)
        } else {
            Ok(())
        }
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> Rational {
        self.dist
            .iter()
            .flatten()
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }
}

/// A failed metric axiom, named by the offending labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NonZeroDiagonal {
        point: String,
        #[serde(with = "rational::serde_rational")]
        value: Rational,
    },
    Asymmetric {
        a: String,
        b: String,
        #[serde(with = "rational::serde_rational")]
        forward: Rational,
        #[serde(with = "rational::serde_rational")]
        backward: Rational,
    },
    NonPositive {
        a: String,
        b: String,
        #[serde(with = "rational::serde_rational")]
        value: Rational,
    },
    /// `d(a,b) > d(a,via) + d(via,b)`.
    Triangle {
        a: String,
        via: String,
        b: String,
        #[serde(with = "rational::serde_rational")]
        direct: Rational,
        #[serde(with = "rational::serde_rational")]
        detour: Rational,
    },
    GalleryMismatch {
        a: String,
        b: String,
        #[serde(with = "rational::serde_rational")]
        expected: Rational,
        #[serde(with = "rational::serde_rational")]
        found: Rational,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use rational::format as r;
        match self {
            Violation::NonZeroDiagonal { point, value } => {
                write!(f, "d({point},{point}) = {} is not zero", r(value))
            }
            Violation::Asymmetric { a, b, forward, backward } => {
                write!(f, "d({a},{b}) = {} but d({b},{a}) = {}", r(forward), r(backward))
            }
            Violation::NonPositive { a, b, value } => {
                write!(f, "d({a},{b}) = {} is not positive", r(value))
            }
            Violation::Triangle { a, via, b, direct, detour } => write!(
                f,
                "triangle inequality fails on ({a},{via},{b}): d({a},{b}) = {} > {} = d({a},{via}) + d({via},{b})",
                r(direct),
                r(detour)
            ),
            Violation::GalleryMismatch { a, b, expected, found } => write!(
                f,
                "d({a},{b}) = {} differs from the closed form {}",
                r(found),
                r(expected)
            ),
        }
    }
}

/// Lists every violated metric axiom. An empty list means the matrix is a
/// metric (and, for gallery spaces, agrees with the family's closed form).
pub fn validate(space: &MetricSpace) -> Vec<Violation> {
    let n = space.len();
    let name = |i: usize| space.labels[i].clone();
    let d = |i: usize, j: usize| &space.dist[i][j];
    let mut out = Vec::new();
    for i in 0..n {
        if !d(i, i).is_zero() {
            out.push(Violation::NonZeroDiagonal { point: name(i), value: d(i, i).clone() });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if d(i, j) != d(j, i) {
                out.push(Violation::Asymmetric {
                    a: name(i),
                    b: name(j),
                    forward: d(i, j).clone(),
                    backward: d(j, i).clone(),
                });
            }
            if !d(i, j).is_positive() {
                out.push(Violation::NonPositive { a: name(i), b: name(j), value: d(i, j).clone() });
            }
            if d(j, i) != d(i, j) && !d(j, i).is_positive() {
                out.push(Violation::NonPositive { a: name(j), b: name(i), value: d(j, i).clone() });
            }
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            for via in 0..n {
                if via == a || via == b {
                    continue;
                }
                let detour = d(a, via) + d(via, b);
                if d(a, b) > &detour {
                    out.push(Violation::Triangle {
                        a: name(a),
                        via: name(via),
                        b: name(b),
                        direct: d(a, b).clone(),
                        detour,
                    });
                }
            }
        }
    }
    if let SpaceKind::Gallery { family, n: depth } = space.kind() {
        if *depth + 1 != n {
            out.push(Violation::GalleryMismatch {
                a: name(0),
                b: name(0),
                expected: rational::int(*depth as i64 + 1),
                found: rational::int(n as i64),
            });
        } else {
            for i in 0..n {
                for j in 0..n {
                    let expected = family.distance(i, j);
                    if &expected != d(i, j) {
                        out.push(Violation::GalleryMismatch {
                            a: name(i),
                            b: name(j),
                            expected,
                            found: d(i, j).clone(),
                        });
                    }
                }
            }
        }
    }
    out
}

/// The metric segment `[x,y] = { z : d(x,z) + d(z,y) = d(x,y) }`, sorted by
/// index. Always contains `x` and `y`.
pub fn metric_segment(space: &MetricSpace, x: PointId, y: PointId) -> Result<Vec<PointId>> {
    space.check_pair(x, y)?;
    Ok(space.points().filter(|&z| space.excess(x, y, z).is_zero()).collect())
}

pub fn segment_is_trivial(space: &MetricSpace, x: PointId, y: PointId) -> Result<bool> {
    Ok(metric_segment(space, x, y)?.len() == 2)
}
