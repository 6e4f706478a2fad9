//! Strong norm attainment of Lipschitz functions on finite spaces.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extremal::oracle_extreme_points;
use crate::free_space::Molecule;
use crate::lipschitz::{lip_norm, pair_molecule, LipFunction};
use crate::metric::{segment_is_trivial, MetricSpace};
use crate::rational::{self, ratio, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AttainmentReport {
    #[serde(with = "rational::serde_rational")]
    pub lip_norm: Rational,
    /// Ordered pairs `(u,v)` with `f(u) - f(v) = ||f||_L d(u,v)`.
    pub attaining_pairs: Vec<[String; 2]>,
    /// The first attaining pair whose segment is trivial.
    pub trivial_segment_pair: Option<[String; 2]>,
}

pub fn strongly_attains(space: &MetricSpace, f: &LipFunction) -> Result<AttainmentReport> {
    let norm = lip_norm(space, f)?.value;
    if norm.is_zero() {
        return Err(Error::DegenerateInput("the zero function attains nothing".into()));
    }
    let attaining: Vec<Molecule> = Molecule::all(space)
        .into_iter()
        .filter(|&m| pair_molecule(space, f, m) == norm)
        .collect();
    let names = |m: Molecule| [space.label(m.x).to_string(), space.label(m.y).to_string()];
    let mut trivial = None;
    for &m in &attaining {
        if segment_is_trivial(space, m.x, m.y)? {
            trivial = Some(names(m));
            break;
        }
    }
    Ok(AttainmentReport {
        lip_norm: norm,
        attaining_pairs: attaining.into_iter().map(names).collect(),
        trivial_segment_pair: trivial,
    })
}

/// Grid for random functions: `k / GRID_DENOM` with `|k| <= GRID_HALF_WIDTH`.
pub const GRID_HALF_WIDTH: i64 = 8;
pub const GRID_DENOM: i64 = 4;

/// Independent grid values, base-shifted; redrawn while identically zero.
pub fn random_function<R: Rng + ?Sized>(space: &MetricSpace, rng: &mut R) -> LipFunction {
    loop {
        let values: Vec<Rational> = (0..space.len())
            .map(|_| ratio(rng.gen_range(-GRID_HALF_WIDTH..=GRID_HALF_WIDTH), GRID_DENOM))
            .collect();
        let f = LipFunction::shifted(space, values).expect("one value per point");
        if !f.is_zero() {
            return f;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SampleOutcome {
    pub function: LipFunction,
    #[serde(with = "rational::serde_rational")]
    pub functional_norm: Rational,
    /// Oracle vertex where the functional attains its norm.
    pub vertex: [String; 2],
    pub strongly_attains: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NaReport {
    pub seed: u64,
    pub samples: usize,
    pub passed: bool,
    pub counterexample: Option<SampleOutcome>,
    pub outcomes: Vec<SampleOutcome>,
}

/// For each sample `f`: maximizes `<f, .>` over the oracle vertices of the
/// unit ball, checks the value equals `||f||_L`, and that the maximizing
/// vertex is a molecule on which `f` strongly attains its norm.
pub fn verify_na_equals_sna(space: &MetricSpace, sample_count: usize, seed: u64) -> Result<NaReport> {
    let vertices = oracle_extreme_points(space)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let functions: Vec<LipFunction> = (0..sample_count).map(|_| random_function(space, &mut rng)).collect();
    let outcomes = functions
        .into_par_iter()
        .map(|f| check_sample(space, &vertices, f))
        .collect::<Result<Vec<_>>>()?;
    let counterexample = outcomes.iter().find(|o| !o.strongly_attains).cloned();
    Ok(NaReport { seed, samples: sample_count, passed: counterexample.is_none(), counterexample, outcomes })
}

fn check_sample(space: &MetricSpace, vertices: &[Molecule], f: LipFunction) -> Result<SampleOutcome> {
    let (value, vertex) = vertices
        .iter()
        .map(|&m| (pair_molecule(space, &f, m), m))
        .fold(None, |best: Option<(Rational, Molecule)>, (v, m)| match best {
            Some((b, bm)) if b >= v => Some((b, bm)),
            _ => Some((v, m)),
        })
        .expect("a space with molecules has vertices");
    let report = strongly_attains(space, &f)?;
    let name = [space.label(vertex.x).to_string(), space.label(vertex.y).to_string()];
    let ok = value == report.lip_norm
        && report.attaining_pairs.contains(&name)
        && segment_is_trivial(space, vertex.x, vertex.y)?;
    Ok(SampleOutcome { function: f, functional_norm: value, vertex: name, strongly_attains: ok })
}
