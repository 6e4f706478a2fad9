//! Ground truth by brute force: `m` is a vertex of `conv(V)` exactly when
//! it is not a convex combination of the other molecules.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::free_space::Molecule;
use crate::lp::{LinearProgram, Relation};
use crate::metric::MetricSpace;
use crate::rational::{int, Rational};

pub const DEFAULT_ORACLE_CAP: usize = 10;

pub fn oracle_extreme_points(space: &MetricSpace) -> Result<Vec<Molecule>> {
    oracle_extreme_points_with_cap(space, DEFAULT_ORACLE_CAP)
}

/// Vertices of the unit ball, in lexicographic molecule order.
pub fn oracle_extreme_points_with_cap(space: &MetricSpace, cap: usize) -> Result<Vec<Molecule>> {
    space.has_molecules()?;
    if space.len() > cap {
        return Err(Error::TooLarge { points: space.len(), cap });
    }
    let molecules = Molecule::all(space);
    // coordinates on the non-base points determine a zero-sum element
    let coords: Vec<Vec<Rational>> = molecules
        .iter()
        .map(|m| m.element(space).coeffs()[1..].to_vec())
        .collect();
    Ok(molecules
        .par_iter()
        .enumerate()
        .filter(|(i, _)| is_vertex(*i, &coords))
        .map(|(_, m)| *m)
        .collect())
}

fn is_vertex(i: usize, coords: &[Vec<Rational>]) -> bool {
    let others: Vec<usize> = (0..coords.len()).filter(|&j| j != i).collect();
    let mut lp = LinearProgram::new(others.len());
    for u in 0..coords[i].len() {
        let row = others.iter().map(|&j| coords[j][u].clone()).collect();
        lp.add(row, Relation::Eq, coords[i][u].clone());
    }
    lp.add(vec![int(1); others.len()], Relation::Eq, int(1));
    !lp.is_feasible()
}
