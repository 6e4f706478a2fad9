//! The power transform `d -> d^p` for `0 < p < 1`.
//!
//! Powers are evaluated in `f64` and stored as the rational approximation
//! within [`SNOWFLAKE_TOLERANCE`] (relative). An entry is exact when the
//! approximation `r` satisfies `r^q = d^k` for `p = k/q`, which catches
//! every perfect power such as `4^(1/2) = 2`.

use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use super::{MetricSpace, SpaceKind};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Relative error bound on each stored snowflake distance.
pub const SNOWFLAKE_TOLERANCE: f64 = 1e-13;

fn power(d: &Rational, p: &Rational) -> (Rational, bool) {
    if d.is_zero() {
        return (Rational::zero(), true);
    }
    let value = rational::to_f64(d).powf(rational::to_f64(p));
    let r = rational::approximate(value, SNOWFLAKE_TOLERANCE);
    let exact = match (p.numer().to_u32(), p.denom().to_u32()) {
        (Some(k), Some(q)) if q <= 64 => Pow::pow(&r, q) == Pow::pow(d, k),
        _ => false,
    };
    (r, exact)
}

/// Snowflake of `space` with exponent `p`; labels and base point are kept.
pub fn snowflake(space: &MetricSpace, p: &Rational) -> Result<MetricSpace> {
    if !p.is_positive() || p >= &Rational::one() {
        return Err(Error::InvalidParameter(format!(
            "snowflake exponent must lie in (0,1), got {}",
            rational::format(p)
        )));
    }
    let mut exact = true;
    let dist = space
        .matrix()
        .iter()
        .map(|row| {
            row.iter()
                .map(|d| {
                    let (r, e) = power(d, p);
                    exact &= e;
                    r
                })
                .collect()
        })
        .collect();
    MetricSpace::with_kind(
        space.labels().to_vec(),
        dist,
        SpaceKind::Snowflake { exponent: p.clone(), exact },
    )
}

/// `a^p + b^p - (a+b)^p` for `a, b > 0`, the least possible excess of a
/// point at distances `a`, `b` from the endpoints after snowflaking.
/// Written as `(a+b)^p * ((1-s)^p + expm1(p ln s))` with `s = a/(a+b)` to
/// avoid cancellation.
pub fn concavity_margin(a: f64, b: f64, p: f64) -> f64 {
    let sum = a + b;
    let s = a / sum;
    sum.powf(p) * ((b / sum).powf(p) + (p * s.ln()).exp_m1())
}
