//! Dense-tableau two-phase simplex over exact rationals.
//!
//! All variables are non-negative. Bland's rule (smallest eligible column
//! enters, smallest basic index leaves on ratio ties) rules out cycling.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `maximize objective · x` subject to the constraints and `x >= 0`.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Rational, x: Vec<Rational> },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![Rational::zero(); num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars, "constraint width");
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(&self.objective)
    }

    /// Phase one only: is the feasible region non-empty?
    pub fn is_feasible(&self) -> bool {
        Tableau::build(self).phase_one()
    }
}

struct Tableau {
    /// `rows x (cols + 1)`; the last column is the right-hand side.
    a: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    cols: usize,
    num_vars: usize,
    artificial_from: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.constraints.len();
        // normalize to rhs >= 0
        let rows: Vec<(Vec<Rational>, Relation, Rational)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_negative() {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coeffs.iter().map(|v| -v).collect(), flipped, -&c.rhs)
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs.clone())
                }
            })
            .collect();
        let slacks = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let artificials = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let n = lp.num_vars;
        let cols = n + slacks + artificials;
        let artificial_from = n + slacks;
        let mut a = vec![vec![Rational::zero(); cols + 1]; m];
        let mut basis = vec![0; m];
        let (mut s, mut t) = (n, artificial_from);
        for (i, (coeffs, rel, rhs)) in rows.into_iter().enumerate() {
            a[i][..n].clone_from_slice(&coeffs);
            a[i][cols] = rhs;
            match rel {
                Relation::Le => {
                    a[i][s] = Rational::one();
                    basis[i] = s;
                    s += 1;
                }
                Relation::Ge => {
                    a[i][s] = -Rational::one();
                    s += 1;
                    a[i][t] = Rational::one();
                    basis[i] = t;
                    t += 1;
                }
                Relation::Eq => {
                    a[i][t] = Rational::one();
                    basis[i] = t;
                    t += 1;
                }
            }
        }
        Tableau { a, basis, cols, num_vars: n, artificial_from }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.a[r][c].clone();
        if !p.is_one() {
            for v in self.a[r].iter_mut() {
                *v /= &p;
            }
        }
        let pivot_row = self.a[r].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost · x` over columns `< limit`. Returns false when
    /// unbounded.
    fn optimize(&mut self, cost: &[Rational], limit: usize) -> bool {
        loop {
            // reduced cost c_j - c_B B^{-1} A_j, read off the canonical tableau
            let entering = (0..limit).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut rc = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !cost[b].is_zero() && !self.a[i][j].is_zero() {
                        rc -= &cost[b] * &self.a[i][j];
                    }
                }
                rc.is_positive()
            });
            let Some(c) = entering else { return true };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.a.len() {
                if !self.a[i][c].is_positive() {
                    continue;
                }
                let ratio = &self.a[i][self.cols] / &self.a[i][c];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }

    /// Drives the artificial variables to zero. On success the tableau is
    /// a feasible basis using no artificial column.
    fn phase_one(&mut self) -> bool {
        if self.artificial_from == self.cols {
            return true;
        }
        let mut cost = vec![Rational::zero(); self.cols];
        for c in cost.iter_mut().skip(self.artificial_from) {
            *c = -Rational::one();
        }
        self.optimize(&cost, self.cols);
        let infeasibility: Rational = self
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= self.artificial_from)
            .map(|(i, _)| self.a[i][self.cols].clone())
            .sum();
        if infeasibility.is_positive() {
            return false;
        }
        // pivot remaining (zero-valued) artificials out, dropping redundant rows
        let mut i = 0;
        while i < self.a.len() {
            if self.basis[i] >= self.artificial_from {
                match (0..self.artificial_from).find(|&j| !self.a[i][j].is_zero()) {
                    Some(j) => self.pivot(i, j),
                    None => {
                        self.a.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        true
    }

    fn run(mut self, objective: &[Rational]) -> LpOutcome {
        if !self.phase_one() {
            return LpOutcome::Infeasible;
        }
        let mut cost = vec![Rational::zero(); self.cols];
        cost[..self.num_vars].clone_from_slice(objective);
        if !self.optimize(&cost, self.artificial_from) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Rational::zero(); self.num_vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.num_vars {
                x[b] = self.a[i][self.cols].clone();
            }
        }
        let value = x.iter().zip(objective).map(|(a, b)| a * b).sum();
        LpOutcome::Optimal { value, x }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18  ->  36 at (2, 6)
        let mut lp = LinearProgram::new(2);
        lp.objective = v(&[3, 5]);
        lp.add(v(&[1, 0]), Relation::Le, int(4));
        lp.add(v(&[0, 2]), Relation::Le, int(12));
        lp.add(v(&[3, 2]), Relation::Le, int(18));
        assert_eq!(lp.solve(), LpOutcome::Optimal { value: int(36), x: v(&[2, 6]) });
    }

    #[test]
    fn equality_and_ge_rows_need_phase_one() {
        // max -x - y, x + y = 1, x - y >= 1/2
        let mut lp = LinearProgram::new(2);
        lp.objective = v(&[-1, -1]);
        lp.add(v(&[1, 1]), Relation::Eq, int(1));
        lp.add(v(&[1, -1]), Relation::Ge, ratio(1, 2));
        match lp.solve() {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, int(-1));
                assert!(&x[0] - &x[1] >= ratio(1, 2));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add(v(&[1]), Relation::Le, int(1));
        lp.add(v(&[1]), Relation::Ge, int(2));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
        assert!(!lp.is_feasible());

        let mut lp = LinearProgram::new(2);
        lp.objective = v(&[1, 0]);
        lp.add(v(&[1, -1]), Relation::Le, int(1));
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn negative_rhs_and_redundant_equalities() {
        // -x <= -2 is x >= 2; the two equalities repeat each other
        let mut lp = LinearProgram::new(2);
        lp.objective = v(&[-1, 0]);
        lp.add(v(&[-1, 0]), Relation::Le, int(-2));
        lp.add(v(&[1, 1]), Relation::Eq, int(5));
        lp.add(v(&[2, 2]), Relation::Eq, int(10));
        assert_eq!(lp.solve(), LpOutcome::Optimal { value: int(-2), x: v(&[2, 3]) });
    }

    #[test]
    fn degenerate_problem_terminates() {
        // classic cycling example for the largest-coefficient rule
        let mut lp = LinearProgram::new(4);
        lp.objective = vec![ratio(3, 4), int(-150), ratio(1, 50), int(-6)];
        lp.add(vec![ratio(1, 4), int(-60), ratio(-1, 25), int(9)], Relation::Le, int(0));
        lp.add(vec![ratio(1, 2), int(-90), ratio(-1, 50), int(3)], Relation::Le, int(0));
        lp.add(v(&[0, 0, 1, 0]), Relation::Le, int(1));
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, ratio(1, 20)),
            other => panic!("{other:?}"),
        }
    }
}
