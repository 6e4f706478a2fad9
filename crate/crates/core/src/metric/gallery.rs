//! Countable example spaces, truncated to finitely many points, together
//! with hand-derived certificates describing every point past the
//! truncation.
//!
//! Index conventions (index 0 is always the base point `0`):
//!
//! | family       | index `i >= 1`                                    |
//! |--------------|---------------------------------------------------|
//! | `ag`         | `x_i` in c0: `x_1 = 2e_1`, `x_i = e_1 + (1+1/i)e_i` |
//! | `tree_omega` | `1 = x_inf = (1,0)`, `i >= 2` is `(1-1/i, 1/i^2)`  |
//! | `star`       | leaf `i`, joined to `0` by a unit edge             |
//! | `nondual`    | `1 = a`, `2 = b`, `i >= 3` is the integer `i - 2`  |
//! | `two_row`    | odd `i` is `(1,(i-1)/2)`, even `i` is `(0,i/2)`    |

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{MetricSpace, PointId, SpaceKind};
use crate::error::{Error, Result};
use crate::rational::{self, int, ratio, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Ag,
    TreeOmega,
    Star,
    Nondual,
    TwoRow,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidGallery(s.to_string()))
    }
}

fn recip(m: u64) -> Rational {
    Rational::new(1.into(), m.into())
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Ag,
        Family::TreeOmega,
        Family::Star,
        Family::Nondual,
        Family::TwoRow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Ag => "ag",
            Family::TreeOmega => "tree_omega",
            Family::Star => "star",
            Family::Nondual => "nondual",
            Family::TwoRow => "two_row",
        }
    }

    pub fn label(self, i: usize) -> String {
        if i == 0 {
            return "0".to_string();
        }
        match self {
            Family::Ag => format!("x{i}"),
            Family::TreeOmega if i == 1 => "xinf".to_string(),
            Family::TreeOmega => format!("x{i}"),
            Family::Star => i.to_string(),
            Family::Nondual => match i {
                1 => "a".to_string(),
                2 => "b".to_string(),
                _ => (i - 2).to_string(),
            },
            Family::TwoRow if i % 2 == 1 => format!("b{}", (i - 1) / 2),
            Family::TwoRow => format!("a{}", i / 2),
        }
    }

    /// Inverse of [`Family::label`], valid for indices beyond any truncation.
    pub fn index_of(self, label: &str) -> Option<usize> {
        if label == "0" {
            return Some(0);
        }
        let num = |s: &str| s.parse::<usize>().ok();
        let i = match self {
            Family::Ag => num(label.strip_prefix('x')?).filter(|&i| i >= 1)?,
            Family::TreeOmega if label == "xinf" => 1,
            Family::TreeOmega => num(label.strip_prefix('x')?).filter(|&i| i >= 2)?,
            Family::Star => num(label).filter(|&i| i >= 1)?,
            Family::Nondual => match label {
                "a" => 1,
                "b" => 2,
                _ => num(label).filter(|&i| i >= 1)? + 2,
            },
            Family::TwoRow => {
                if let Some(rest) = label.strip_prefix('a') {
                    2 * num(rest).filter(|&c| c >= 1)?
                } else {
                    2 * num(label.strip_prefix('b')?)? + 1
                }
            }
        };
        (self.label(i) == label).then_some(i)
    }

    /// Closed-form distance between the points with indices `i` and `j`.
    pub fn distance(self, i: usize, j: usize) -> Rational {
        if i == j {
            return Rational::zero();
        }
        match self {
            Family::Ag => {
                let (lo, hi) = (i.min(j) as u64, i.max(j) as u64);
                match lo {
                    0 if hi == 1 => int(2),
                    0 | 1 => Rational::one() + recip(hi),
                    _ => Rational::one() + recip(lo),
                }
            }
            Family::TreeOmega => {
                // real-tree distance: trunk offset plus both branch heights
                let place = |k: usize| -> (Rational, Rational) {
                    match k {
                        0 => (Rational::zero(), Rational::zero()),
                        1 => (Rational::one(), Rational::zero()),
                        _ => {
                            let k = k as u64;
                            (Rational::one() - recip(k), recip(k * k))
                        }
                    }
                };
                let (a, ha) = place(i);
                let (b, hb) = place(j);
                (a - b).abs() + ha + hb
            }
            Family::Star => {
                if i == 0 || j == 0 {
                    int(1)
                } else {
                    int(2)
                }
            }
            Family::Nondual => {
                let (lo, hi) = (i.min(j), i.max(j));
                if hi <= 2 {
                    int(2)
                } else if lo <= 2 {
                    Rational::one() + recip((hi - 2) as u64)
                } else {
                    int(1)
                }
            }
            Family::TwoRow => {
                let row = |k: usize| k % 2;
                if row(i) == row(j) {
                    int(1)
                } else {
                    int(2)
                }
            }
        }
    }

    /// Upper bound on every pairwise distance in the full countable space.
    pub fn diameter_bound(self) -> Rational {
        match self {
            Family::TreeOmega => int(1),
            _ => int(2),
        }
    }

    /// The integer parameter of a family point (`m` in `x_m`), or 0 for
    /// points that are not part of the countable sequence.
    fn param(self, i: usize) -> u64 {
        match self {
            Family::Ag | Family::Star => i as u64,
            Family::TreeOmega if i >= 2 => i as u64,
            Family::Nondual if i >= 3 => (i - 2) as u64,
            Family::TwoRow => i as u64,
            _ => 0,
        }
    }

    fn index_of_param(self, m: u64) -> usize {
        match self {
            Family::Nondual => m as usize + 2,
            _ => m as usize,
        }
    }

    /// Certificate for the pair `{i, j}` against the truncation at depth `n`.
    pub fn certificate(self, i: usize, j: usize, n: usize) -> TailCertificate {
        let (lo, hi) = (i.min(j), i.max(j));
        let uniform = |b: Rational| TailShape::Uniform { excess_at_least: b };
        let shape = match self {
            Family::Ag if (lo, hi) == (0, 1) => TailShape::Harmonic { c: int(2), r: int(1), s: int(1) },
            Family::Ag => uniform(int(1)),
            Family::TreeOmega if lo == 1 || hi == 1 => TailShape::Branch { c: int(2) },
            Family::TreeOmega => uniform(ratio(2, hi as i64) - ratio(2, n as i64 + 1)),
            Family::Star => uniform(int(2)),
            Family::Nondual => match (lo <= 2, hi <= 2) {
                (true, true) => TailShape::Harmonic { c: int(2), r: int(1), s: int(1) },
                (true, false) if self.param(hi) == 1 => {
                    TailShape::Harmonic { c: int(1), r: int(1), s: int(0) }
                }
                (true, false) => uniform(Rational::one() - recip(self.param(hi))),
                _ => uniform(int(1)),
            },
            Family::TwoRow => uniform(int(1)),
        };
        TailCertificate {
            family: self,
            x: i,
            y: j,
            pair: [self.label(i), self.label(j)],
            truncation: n,
            shape,
            diameter_bound: self.diameter_bound(),
        }
    }
}

/// Closed-form description of the points past a truncation, as seen from
/// a fixed pair `(x, y)`. `m` is the family parameter of a tail point and
/// "excess" is `d(x,z) + d(z,y) - d(x,y)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum TailShape {
    /// Every tail point has excess at least this positive bound.
    Uniform {
        #[serde(with = "rational::serde_rational")]
        excess_at_least: Rational,
    },
    /// Excess is exactly `c/m` and `min(d(x,z), d(y,z))` is exactly `r + s/m`.
    Harmonic {
        #[serde(with = "rational::serde_rational")]
        c: Rational,
        #[serde(with = "rational::serde_rational")]
        r: Rational,
        #[serde(with = "rational::serde_rational")]
        s: Rational,
    },
    /// Excess is exactly `c/m^2` and `min(d(x,z), d(y,z)) <= 1/m + 1/m^2`.
    Branch {
        #[serde(with = "rational::serde_rational")]
        c: Rational,
    },
}

/// Lower bound on the excess of tail points with min-distance at least ε.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TailExcess {
    /// No tail point has min-distance ≥ ε.
    NoQualifying,
    AtLeast(Rational),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailCertificate {
    pub family: Family,
    pub x: usize,
    pub y: usize,
    pub pair: [String; 2],
    pub truncation: usize,
    pub shape: TailShape,
    #[serde(with = "rational::serde_rational")]
    pub diameter_bound: Rational,
}

/// Largest `m >= 1` with `1/m + 1/m^2 >= eps`, or 0 if there is none.
fn branch_reach(eps: &Rational) -> u64 {
    if eps > &int(2) {
        return 0;
    }
    let mut m = rational::floor_to_u64(&(Rational::one() / eps)) + 2;
    while m > 0 && recip(m) + recip(m * m) < *eps {
        m -= 1;
    }
    m
}

impl TailCertificate {
    fn first_tail_param(&self) -> u64 {
        self.family.param(self.truncation + 1)
    }

    /// Valid lower bound on `inf { excess(z) : z past the truncation,
    /// min(d(x,z), d(y,z)) >= eps }`. Non-decreasing in `eps`, with
    /// [`TailExcess::NoQualifying`] acting as +infinity.
    pub fn excess_lower_bound(&self, eps: &Rational) -> TailExcess {
        match &self.shape {
            TailShape::Uniform { excess_at_least } => TailExcess::AtLeast(excess_at_least.clone()),
            TailShape::Harmonic { c, r, s } => {
                if eps <= r {
                    return TailExcess::AtLeast(Rational::zero());
                }
                if s.is_zero() {
                    return TailExcess::NoQualifying;
                }
                let reach = rational::floor_to_u64(&(s / (eps - r)));
                if reach < self.first_tail_param() {
                    TailExcess::NoQualifying
                } else {
                    TailExcess::AtLeast(c / Rational::from_integer(reach.into()))
                }
            }
            TailShape::Branch { c } => {
                let reach = branch_reach(eps);
                if reach < self.first_tail_param() {
                    TailExcess::NoQualifying
                } else {
                    TailExcess::AtLeast(c * recip(reach * reach))
                }
            }
        }
    }

    /// Lower bound on `excess(z) / min(d(x,z), d(y,z))` over tail points;
    /// zero when the ratio accumulates at zero.
    pub fn ratio_lower_bound(&self) -> Rational {
        match &self.shape {
            TailShape::Uniform { excess_at_least } => excess_at_least / &self.diameter_bound,
            _ => Rational::zero(),
        }
    }

    /// Every tail point lies strictly off the segment `[x,y]`.
    pub fn tail_is_strict(&self) -> bool {
        match &self.shape {
            TailShape::Uniform { excess_at_least } => excess_at_least.is_positive(),
            TailShape::Harmonic { c, .. } | TailShape::Branch { c } => c.is_positive(),
        }
    }

    /// For a vanishing-excess tail whose min-distance stays bounded below,
    /// the bound `r`: tail excess tends to zero while min-distance ≥ r.
    pub fn vanishing_floor(&self) -> Option<Rational> {
        match &self.shape {
            TailShape::Harmonic { r, .. } if r.is_positive() => Some(r.clone()),
            _ => None,
        }
    }

    /// Closed-form witness index for the level-`n` inequality
    /// `d(x,z) + d(y,z) <= d(x,y) + min(d(x,z), d(y,z)) / n`, verified
    /// exactly. `None` when the tail does not accumulate on the segment.
    pub fn z_witness(&self, n: u64) -> Option<usize> {
        let fam = self.family;
        let pmax = fam.param(self.x).max(fam.param(self.y));
        let start = match &self.shape {
            TailShape::Uniform { .. } => return None,
            TailShape::Harmonic { c, r, .. } => {
                if !r.is_positive() {
                    return None;
                }
                let need = rational::ceil_to_u64(&(c * Rational::from_integer(n.into()) / r));
                need.max(pmax + 1).max(1)
            }
            TailShape::Branch { .. } => (2 * n).max(2 * pmax).max(2),
        };
        let n_r = Rational::from_integer(n.into());
        (start..start + 10_000).map(|m| fam.index_of_param(m)).find(|&z| {
            if z == self.x || z == self.y {
                return false;
            }
            let dxz = fam.distance(self.x, z);
            let dyz = fam.distance(self.y, z);
            let min = (&dxz).min(&dyz).clone();
            dxz.clone() + &dyz <= fam.distance(self.x, self.y) + min / &n_r
        })
    }

    /// Checks the certificate's claims on the points of `space` with index
    /// in `(truncation, space.len())`.
    pub fn check_against(&self, space: &MetricSpace) -> std::result::Result<(), String> {
        let d = |i: usize, j: usize| space.d(PointId(i), PointId(j)).clone();
        self.check_range(self.truncation + 1..space.len(), d)
    }

    /// Checks the claims on the next `extra` tail points straight from the
    /// closed-form distances.
    pub fn check_closed_form(&self, extra: usize) -> std::result::Result<(), String> {
        let fam = self.family;
        self.check_range(self.truncation + 1..self.truncation + 1 + extra, |i, j| fam.distance(i, j))
    }

    fn check_range(
        &self,
        range: std::ops::Range<usize>,
        d: impl Fn(usize, usize) -> Rational,
    ) -> std::result::Result<(), String> {
        let (x, y) = (self.x, self.y);
        let dxy = d(x, y);
        for t in range {
            let label = self.family.label(t);
            let m = self.family.param(t);
            if m == 0 {
                return Err(format!("{label} is not a sequence point"));
            }
            let (dx, dy) = (d(x, t), d(y, t));
            let e = &dx + &dy - &dxy;
            let min = (&dx).min(&dy).clone();
            if dx > self.diameter_bound || dy > self.diameter_bound {
                return Err(format!("tail point {label} exceeds the diameter bound"));
            }
            let ok = match &self.shape {
                TailShape::Uniform { excess_at_least } => {
                    excess_at_least.is_positive() && &e >= excess_at_least
                }
                TailShape::Harmonic { c, r, s } => {
                    let inv = recip(m);
                    e == c * &inv && min == r + s * inv
                }
                TailShape::Branch { c } => {
                    e == c * recip(m * m) && min <= recip(m) + recip(m * m)
                }
            };
            if !ok {
                return Err(format!(
                    "certificate {:?} for ({}, {}) fails at tail point {label}: excess {}, min-distance {}",
                    self.shape,
                    self.pair[0],
                    self.pair[1],
                    rational::format(&e),
                    rational::format(&min)
                ));
            }
        }
        Ok(())
    }
}

/// Builds the truncation of `name` with the base point and the first `n`
/// family points. Every pair's certificate is checked against the points of
/// the truncation that lie beyond half its depth.
pub fn gallery(name: &str, n: usize) -> Result<MetricSpace> {
    let family: Family = name.parse()?;
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "gallery depth must be at least 3, got {n}"
        )));
    }
    let labels = (0..=n).map(|i| family.label(i)).collect();
    let dist = (0..=n)
        .map(|i| (0..=n).map(|j| family.distance(i, j)).collect())
        .collect();
    let space = MetricSpace::with_kind(labels, dist, SpaceKind::Gallery { family, n })?;
    // keep the specially named points (`a`, `b`, `xinf`) inside the prefix
    let half = (n / 2).max(2);
    for i in 0..=half {
        for j in i + 1..=half {
            family
                .certificate(i, j, half)
                .check_against(&space)
                .map_err(Error::Invariant)?;
        }
    }
    Ok(space)
}

/// Certificate for `(x, y)` when `space` is a gallery truncation.
pub fn certificate_for(space: &MetricSpace, x: PointId, y: PointId) -> Option<TailCertificate> {
    match space.kind() {
        SpaceKind::Gallery { family, n } => Some(family.certificate(x.0, y.0, *n)),
        _ => None,
    }
}
