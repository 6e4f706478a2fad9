use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::metric::{MetricSpace, PointId, SpaceKind, TailCertificate};
use crate::rational::{self, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Proven,
    Refuted,
    Inconclusive,
}

impl Status {
    pub fn negate(self) -> Self {
        match self {
            Status::Proven => Status::Refuted,
            Status::Refuted => Status::Proven,
            Status::Inconclusive => Status::Inconclusive,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Proven => "proven",
            Status::Refuted => "refuted",
            Status::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Extreme,
    Denting,
    PropertyZ,
    StronglyExposed,
    ExposedByFxy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Cmp {
    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Cmp::Eq => lhs == rhs,
            Cmp::Lt => lhs < rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Gt => lhs > rhs,
            Cmp::Ge => lhs >= rhs,
        }
    }
}

/// What a single evidence row claims. Distances below are `d(x,z)` etc.
/// for the verdict's pair `(x,y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceKind {
    /// `d(x,z) + d(z,y) = d(x,y)`.
    SegmentPoint,
    /// `d(x,z) + d(z,y) > d(x,y)`.
    OffSegment,
    /// `min(d(x,z), d(y,z)) >= eps` for a point of excess zero, or for a
    /// point of a vanishing tail.
    DentingFailure,
    /// `delta(eps) > 0`, where `delta(eps) = 1 - d(x,y) / min_sum` over the
    /// points with `min(d(x,z), d(y,z)) >= eps`, combined with the tail bound.
    DentingRow,
    /// `d(x,z) + d(y,z) <= d(x,y) + min(d(x,z), d(y,z)) / n`.
    ZWitness,
    /// `d(x,z) + d(y,z) > d(x,y) + min(d(x,z), d(y,z)) / n`.
    ZFailure,
    /// Every tail point has positive excess.
    TailStrict,
    /// Tail excess tends to 0 while min-distance stays `>= eps`.
    TailVanishing,
    /// Tail `excess / min-distance` stays above `1/n`.
    TailRatio,
    /// The closed-form witness schedule covers every level.
    TailSchedule,
    /// `<f_xy, m_uv> = 1` for a molecule other than `m_xy`.
    ExposureTie,
    /// `max <f_xy, m_uv> < 1` over molecules other than `m_xy`.
    ExposureGap,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub kind: EvidenceKind,
    /// A point label, or two labels for a molecule.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witness: Vec<String>,
    /// `eps` for denting rows, `n` for (Z) rows.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "rational::serde_rational_opt")]
    pub level: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "rational::serde_rational_opt")]
    pub excess: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "rational::serde_rational_opt")]
    pub min_distance: Option<Rational>,
    #[serde(with = "rational::serde_rational")]
    pub lhs: Rational,
    pub relation: Cmp,
    #[serde(with = "rational::serde_rational")]
    pub rhs: Rational,
}

impl Evidence {
    pub fn new(kind: EvidenceKind, lhs: Rational, relation: Cmp, rhs: Rational) -> Self {
        Evidence {
            kind,
            witness: Vec::new(),
            level: None,
            excess: None,
            min_distance: None,
            lhs,
            relation,
            rhs,
        }
    }

    pub(crate) fn at_point(mut self, space: &MetricSpace, x: PointId, y: PointId, z: PointId) -> Self {
        self.witness = vec![space.label(z).to_string()];
        self.excess = Some(space.excess(x, y, z));
        self.min_distance = Some(space.d(x, z).min(space.d(y, z)).clone());
        self
    }

    pub(crate) fn with_level(mut self, level: Rational) -> Self {
        self.level = Some(level);
        self
    }

    pub fn holds(&self) -> bool {
        self.relation.holds(&self.lhs, &self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub property: Property,
    pub pair: [String; 2],
    pub status: Status,
    pub evidence: Vec<Evidence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<TailCertificate>,
    /// Truncation depth of a gallery space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
}

impl Verdict {
    pub(crate) fn new(property: Property, space: &MetricSpace, x: PointId, y: PointId, certificate: Option<TailCertificate>) -> Self {
        let depth = match space.kind() {
            SpaceKind::Gallery { n, .. } => Some(*n),
            _ => None,
        };
        Verdict {
            property,
            pair: [space.label(x).to_string(), space.label(y).to_string()],
            status: Status::Inconclusive,
            evidence: Vec::new(),
            certificate,
            depth,
        }
    }

    pub fn is_proven(&self) -> bool {
        self.status == Status::Proven
    }

    pub fn is_refuted(&self) -> bool {
        self.status == Status::Refuted
    }

    pub fn rows(&self, kind: EvidenceKind) -> impl Iterator<Item = &Evidence> {
        self.evidence.iter().filter(move |e| e.kind == kind)
    }

    /// The first row of excess zero, if any.
    pub fn zero_excess_row(&self) -> Option<&Evidence> {
        self.evidence.iter().find(|e| e.excess.as_ref().is_some_and(Zero::is_zero))
    }
}

/// One row of [`crate::extremal::classify_all`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationRow {
    pub molecule: [String; 2],
    pub extreme: Verdict,
    pub exposed_by_fxy: Verdict,
    /// Denting, equivalently preserved extreme.
    pub denting: Verdict,
    pub strongly_exposed: Verdict,
    /// Vertex status from the brute-force oracle (finite spaces only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_extreme: Option<bool>,
}

impl ClassificationRow {
    /// `strongly exposed => denting => extreme` on proven verdicts, and the
    /// contrapositive on refuted ones.
    pub fn chain_holds(&self) -> bool {
        let (se, de, ex) = (&self.strongly_exposed, &self.denting, &self.extreme);
        let down = (!se.is_proven() || de.is_proven()) && (!de.is_proven() || ex.is_proven());
        let up = (!ex.is_refuted() || de.is_refuted()) && (!de.is_refuted() || se.is_refuted());
        down && up
    }
}
