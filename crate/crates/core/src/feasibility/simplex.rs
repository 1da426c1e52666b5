//! Dense two-phase simplex over exact rationals.
//!
//! Solves `maximize c.x  subject to  A x <= b, x >= 0` for any sign of `b`.
//! Rows with a negative right-hand side get an artificial variable and
//! phase 1 drives those to zero. Both phases use Bland's rule (lowest
//! eligible entering column, lowest basic index on ratio ties), so the
//! method terminates on degenerate problems.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    /// Reduced costs; the last entry holds `-z`.
    objective: Vec<Rational>,
    basis: Vec<usize>,
    /// Columns that may never enter (artificials during phase 2).
    blocked: Vec<bool>,
}

impl Tableau {
    fn rhs_col(&self) -> usize {
        self.objective.len() - 1
    }

    fn set_objective(&mut self, costs: &[Rational]) {
        let width = self.objective.len();
        self.objective = costs.to_vec();
        self.objective.resize(width, Rational::zero());
        for (r, &b) in self.basis.iter().enumerate() {
            let cost = self.objective[b].clone();
            if cost.is_zero() {
                continue;
            }
            for (o, t) in self.objective.iter_mut().zip(&self.rows[r]) {
                *o -= &cost * t;
            }
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = Rational::one() / &self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = self.rows[row].clone();
        for (r, other) in self.rows.iter_mut().enumerate() {
            if r == row || other[col].is_zero() {
                continue;
            }
            let factor = other[col].clone();
            for (v, p) in other.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        if !self.objective[col].is_zero() {
            let factor = self.objective[col].clone();
            for (v, p) in self.objective.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Runs primal iterations to optimality. Returns `false` if unbounded.
    fn optimize(&mut self) -> bool {
        let rhs = self.rhs_col();
        loop {
            let entering =
                (0..rhs).find(|&j| !self.blocked[j] && self.objective[j].is_positive());
            let Some(col) = entering else {
                return true;
            };
            let mut leaving: Option<(usize, Rational)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if !row[col].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[col];
                let better = match &leaving {
                    None => true,
                    Some((best_r, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*best_r])
                    }
                };
                if better {
                    leaving = Some((r, ratio));
                }
            }
            match leaving {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }

    fn value(&self) -> Rational {
        -self.objective[self.rhs_col()].clone()
    }
}

pub fn maximize(objective: &[Rational], rows: &[Vec<Rational>], rhs: &[Rational]) -> LpOutcome {
    let n = objective.len();
    let m = rows.len();
    assert_eq!(rhs.len(), m, "one right-hand side per row");
    assert!(rows.iter().all(|r| r.len() == n), "rows must match objective width");

    let negative: Vec<usize> = (0..m).filter(|&r| rhs[r].is_negative()).collect();
    let num_art = negative.len();
    let width = n + m + num_art + 1;
    let rhs_col = width - 1;

    let mut tableau_rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art = n + m;
    for r in 0..m {
        let mut row = vec![Rational::zero(); width];
        let flip = rhs[r].is_negative();
        for (j, a) in rows[r].iter().enumerate() {
            row[j] = if flip { -a } else { a.clone() };
        }
        row[n + r] = if flip { -Rational::one() } else { Rational::one() };
        row[rhs_col] = if flip { -&rhs[r] } else { rhs[r].clone() };
        if flip {
            row[art] = Rational::one();
            basis.push(art);
            art += 1;
        } else {
            basis.push(n + r);
        }
        tableau_rows.push(row);
    }

    let mut t = Tableau {
        rows: tableau_rows,
        objective: vec![Rational::zero(); width],
        basis,
        blocked: vec![false; width - 1],
    };

    if num_art > 0 {
        let mut phase1 = vec![Rational::zero(); width - 1];
        for c in phase1.iter_mut().skip(n + m) {
            *c = -Rational::one();
        }
        t.set_objective(&phase1);
        let bounded = t.optimize();
        debug_assert!(bounded, "phase 1 is bounded above by zero");
        if t.value().is_negative() {
            return LpOutcome::Infeasible;
        }
        // Pivot zero-level artificials out of the basis; rows where that is
        // impossible are linear combinations of the others.
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= n + m {
                match (0..n + m).find(|&j| !t.rows[r][j].is_zero()) {
                    Some(col) => {
                        t.pivot(r, col);
                        r += 1;
                    }
                    None => {
                        t.rows.remove(r);
                        t.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
        for b in t.blocked.iter_mut().skip(n + m) {
            *b = true;
        }
    }

    t.set_objective(objective);
    if !t.optimize() {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rows[r][rhs_col].clone();
        }
    }
    LpOutcome::Optimal {
        value: t.value(),
        x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{ratio, rational_from_i64 as int};

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&n| int(n)).collect()
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let out = maximize(
            &ints(&[3, 5]),
            &[ints(&[1, 0]), ints(&[0, 2]), ints(&[3, 2])],
            &ints(&[4, 12, 18]),
        );
        assert_eq!(
            out,
            LpOutcome::Optimal {
                x: ints(&[2, 6]),
                value: int(36)
            }
        );
    }

    #[test]
    fn negative_rhs_needs_phase_one() {
        // max -x - y, x + y >= 2 (as -x - y <= -2), x <= 3 -> value -2
        let out = maximize(
            &ints(&[-1, -1]),
            &[ints(&[-1, -1]), ints(&[1, 0])],
            &ints(&[-2, 3]),
        );
        match out {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, int(-2));
                assert_eq!(&x[0] + &x[1], int(2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        // x >= 1 and x <= 0
        assert_eq!(
            maximize(&ints(&[1]), &[ints(&[-1]), ints(&[1])], &ints(&[-1, 0])),
            LpOutcome::Infeasible
        );
        assert_eq!(
            maximize(&ints(&[1, 0]), &[ints(&[-1, 1])], &ints(&[1])),
            LpOutcome::Unbounded
        );
    }

    #[test]
    fn redundant_equal_rows_are_dropped() {
        // x + y >= 1 twice, x + y <= 1: every artificial ends at zero level.
        let out = maximize(
            &ints(&[1, 2]),
            &[ints(&[-1, -1]), ints(&[-1, -1]), ints(&[1, 1])],
            &ints(&[-1, -1, 1]),
        );
        assert_eq!(
            out,
            LpOutcome::Optimal {
                x: ints(&[0, 1]),
                value: int(2)
            }
        );
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under the largest-coefficient rule.
        let out = maximize(
            &[ratio(3, 4), int(-150), ratio(1, 50), int(-6)],
            &[
                vec![ratio(1, 4), int(-60), ratio(-1, 25), int(9)],
                vec![ratio(1, 2), int(-90), ratio(-1, 50), int(3)],
                vec![int(0), int(0), int(1), int(0)],
            ],
            &ints(&[0, 0, 1]),
        );
        match out {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, ratio(1, 20)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
