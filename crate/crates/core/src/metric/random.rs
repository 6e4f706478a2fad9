//! Seeded random finite metric spaces for tests and experiments.

use rand::seq::SliceRandom;
use rand::Rng;

use super::MetricSpace;
use crate::rational::{int, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RandomSpaceStyle {
    /// Shortest-path metric of a complete graph with weights in `1..=4`.
    Graph,
    /// [`RandomSpaceStyle::Graph`] divided by 2 or 3, giving proper fractions.
    ScaledGraph,
    /// Distinct points of `{0..4}^2` under the taxicab metric.
    L1,
    /// Distinct points of `{0..4}^2` under the max metric.
    LInf,
}

impl RandomSpaceStyle {
    pub const ALL: [RandomSpaceStyle; 4] = [
        RandomSpaceStyle::Graph,
        RandomSpaceStyle::ScaledGraph,
        RandomSpaceStyle::L1,
        RandomSpaceStyle::LInf,
    ];

    pub fn pick<R: Rng + ?Sized>(rng: &mut R) -> Self {
        *Self::ALL.choose(rng).expect("non-empty")
    }
}

fn labels(n: usize) -> Vec<String> {
    std::iter::once("0".to_string())
        .chain((1..n).map(|i| format!("p{i}")))
        .collect()
}

fn graph_metric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Vec<i64>> {
    let mut d = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = rng.gen_range(1..=4);
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

fn grid_metric<R: Rng + ?Sized>(rng: &mut R, n: usize, sup: bool) -> Vec<Vec<i64>> {
    assert!(n <= 25, "the 5x5 grid holds at most 25 points");
    let mut cells: Vec<(i64, i64)> = (0..5).flat_map(|a| (0..5).map(move |b| (a, b))).collect();
    cells.shuffle(rng);
    cells.truncate(n);
    cells
        .iter()
        .map(|&(a, b)| {
            cells
                .iter()
                .map(|&(c, e)| {
                    let (dx, dy) = ((a - c).abs(), (b - e).abs());
                    if sup {
                        dx.max(dy)
                    } else {
                        dx + dy
                    }
                })
                .collect()
        })
        .collect()
}

/// A random metric space on `n >= 1` points labelled `0, p1, p2, ...`.
pub fn random_space<R: Rng + ?Sized>(rng: &mut R, n: usize, style: RandomSpaceStyle) -> MetricSpace {
    let (d, scale) = match style {
        RandomSpaceStyle::Graph => (graph_metric(rng, n), 1),
        RandomSpaceStyle::ScaledGraph => {
            let s = rng.gen_range(2..=3);
            (graph_metric(rng, n), s)
        }
        RandomSpaceStyle::L1 => (grid_metric(rng, n, false), 1),
        RandomSpaceStyle::LInf => (grid_metric(rng, n, true), 1),
    };
    let dist: Vec<Vec<Rational>> = d
        .iter()
        .map(|row| row.iter().map(|&v| int(v) / int(scale)).collect())
        .collect();
    MetricSpace::new(labels(n), dist).expect("square matrix with distinct labels")
}
