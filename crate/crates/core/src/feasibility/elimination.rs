//! Fourier–Motzkin elimination with exact back-substitution.
//!
//! Decides `A x <= b` by projecting out one variable at a time. Redundant
//! combinations are pruned with Chernikov's rule: after `k` eliminations a
//! derived row built from more than `k + 1` original rows is implied by the
//! others and is dropped. Each intermediate system is kept so a feasible
//! point can be rebuilt variable by variable in reverse order.
//!
//! This shares nothing with the simplex code and serves as its cross-check.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::rational::{rational_from_i64, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
struct History(Vec<u64>);

impl History {
    fn single(index: usize, total: usize) -> Self {
        let mut words = vec![0u64; total.div_ceil(64).max(1)];
        words[index / 64] |= 1 << (index % 64);
        History(words)
    }

    fn union(&self, other: &History) -> History {
        History(self.0.iter().zip(&other.0).map(|(a, b)| a | b).collect())
    }

    fn is_subset(&self, other: &History) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<Rational>,
    rhs: Rational,
    history: History,
}

impl Row {
    /// Scales so the first non-zero coefficient has magnitude one.
    fn normalized(mut self) -> Row {
        if let Some(lead) = self.coeffs.iter().find(|c| !c.is_zero()).map(Signed::abs) {
            for c in self.coeffs.iter_mut() {
                *c /= &lead;
            }
            self.rhs /= &lead;
        }
        self
    }

    fn dominates(&self, other: &Row) -> bool {
        self.rhs <= other.rhs && self.history.is_subset(&other.history)
    }

    fn is_trivial(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }
}

/// Drops all-zero rows and parallel copies that another copy dominates:
/// no looser and built from a subset of its original rows. Comparing by
/// subset keeps the history bound valid for everything derived later.
/// `None` if some all-zero row reads `0 <= negative`.
fn tidy(rows: Vec<Row>) -> Option<Vec<Row>> {
    let mut unique: BTreeMap<Vec<Rational>, Vec<Row>> = BTreeMap::new();
    for row in rows {
        if row.is_trivial() {
            if row.rhs.is_negative() {
                return None;
            }
            continue;
        }
        let row = row.normalized();
        let bucket = unique.entry(row.coeffs.clone()).or_default();
        if bucket.iter().any(|kept| kept.dominates(&row)) {
            continue;
        }
        bucket.retain(|kept| !row.dominates(kept));
        bucket.push(row);
    }
    Some(unique.into_values().flatten().collect())
}

fn split_counts(rows: &[Row], var: usize) -> (usize, usize) {
    let pos = rows.iter().filter(|r| r.coeffs[var].is_positive()).count();
    let neg = rows.iter().filter(|r| r.coeffs[var].is_negative()).count();
    (pos, neg)
}

fn eliminate(rows: &[Row], var: usize, max_history: u32) -> Vec<Row> {
    let (mut upper, mut lower, mut rest) = (Vec::new(), Vec::new(), Vec::new());
    for row in rows {
        if row.coeffs[var].is_positive() {
            upper.push(row);
        } else if row.coeffs[var].is_negative() {
            lower.push(row);
        } else {
            rest.push(row.clone());
        }
    }
    for up in &upper {
        for low in &lower {
            let history = up.history.union(&low.history);
            if history.count() > max_history {
                continue;
            }
            // up: a x + ... <= p (a > 0); low: -c x + ... <= q (c > 0).
            // c * up + a * low cancels x.
            let a = up.coeffs[var].clone();
            let c = -low.coeffs[var].clone();
            let coeffs = up
                .coeffs
                .iter()
                .zip(&low.coeffs)
                .map(|(u, l)| &c * u + &a * l)
                .collect::<Vec<_>>();
            let rhs = &c * &up.rhs + &a * &low.rhs;
            let mut combined = Row {
                coeffs,
                rhs,
                history,
            };
            combined.coeffs[var] = Rational::zero();
            rest.push(combined);
        }
    }
    rest
}

/// Returns a point with `A x <= b`, or `None` if there is none.
pub fn find_point(rows: &[Vec<Rational>], rhs: &[Rational]) -> Option<Vec<Rational>> {
    assert_eq!(rows.len(), rhs.len(), "one right-hand side per row");
    let n = rows.first().map_or(0, Vec::len);
    assert!(rows.iter().all(|r| r.len() == n), "rows must have equal width");

    let total = rows.len();
    let initial: Vec<Row> = rows
        .iter()
        .zip(rhs)
        .enumerate()
        .map(|(i, (coeffs, rhs))| Row {
            coeffs: coeffs.clone(),
            rhs: rhs.clone(),
            history: History::single(i, total),
        })
        .collect();

    let mut current = tidy(initial)?;
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut stages: Vec<(usize, Vec<Row>)> = Vec::with_capacity(n);
    let mut eliminated = 0u32;
    while !remaining.is_empty() {
        // Fewest generated rows first; ties go to the lowest index.
        let (pick, _) = remaining
            .iter()
            .enumerate()
            .min_by_key(|(_, &v)| {
                let (p, q) = split_counts(&current, v);
                (p * q, v)
            })
            .expect("remaining is non-empty");
        let var = remaining.remove(pick);
        eliminated += 1;
        let next = eliminate(&current, var, eliminated + 1);
        stages.push((var, current));
        current = tidy(next)?;
    }
    debug_assert!(current.is_empty());

    let mut x = vec![Rational::zero(); n];
    for (var, rows) in stages.iter().rev() {
        let mut lo: Option<Rational> = None;
        let mut hi: Option<Rational> = None;
        for row in rows {
            let a = &row.coeffs[*var];
            if a.is_zero() {
                continue;
            }
            let residual = row
                .coeffs
                .iter()
                .zip(&x)
                .enumerate()
                .filter(|(j, (c, _))| j != var && !c.is_zero())
                .fold(row.rhs.clone(), |acc, (_, (c, v))| acc - c * v);
            let bound = residual / a;
            if a.is_positive() {
                hi = Some(hi.map_or(bound.clone(), |h| h.min(bound)));
            } else {
                lo = Some(lo.map_or(bound.clone(), |l| l.max(bound)));
            }
        }
        x[*var] = match (lo, hi) {
            (Some(l), Some(h)) => {
                debug_assert!(l <= h, "projection guarantees a non-empty interval");
                (l + h) / rational_from_i64(2)
            }
            (Some(l), None) => l,
            (None, Some(h)) => h,
            (None, None) => Rational::zero(),
        };
    }
    debug_assert!(rows.iter().zip(rhs).all(|(r, b)| {
        r.iter()
            .zip(&x)
            .fold(Rational::zero(), |acc, (c, v)| acc + c * v)
            <= *b
    }));
    Some(x)
}
