//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Solves `maximize c·y  s.t.  A y = b, y ≥ 0`. Problems here are tiny (a
//! handful of rows, a few dozen columns), so the tableau is dense and
//! reduced costs are recomputed from scratch each iteration.

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    /// No feasible point; `residual` is the phase-1 optimum, i.e. the least
    /// possible `‖A y − b‖₁` over `y ≥ 0`.
    Infeasible { residual: Rational },
    Unbounded,
    Optimal { value: Rational, solution: Vec<Rational> },
}

struct Tableau {
    /// `rows[i]` holds the coefficients followed by the right-hand side.
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v = &*v * &inv;
            }
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &(&f * p);
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost · y` over columns allowed by `eligible`.
    /// Returns `false` if unbounded.
    fn minimize(&mut self, cost: &[Rational], eligible: &dyn Fn(usize) -> bool) -> bool {
        loop {
            // Bland: lowest-index column with negative reduced cost enters.
            let entering = (0..self.width).filter(|&j| eligible(j)).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut d = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !cost[b].is_zero() && !self.rows[i][j].is_zero() {
                        d -= &(&cost[b] * &self.rows[i][j]);
                    }
                }
                d.is_negative()
            });
            let Some(c) = entering else {
                return true;
            };

            // Ratio test; ties go to the lowest basic variable index.
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else {
                return false;
            };
            self.pivot(r, c);
        }
    }
}

/// `maximize c·y  s.t.  A y = b, y ≥ 0`.
pub fn maximize(a: &[Vec<Rational>], b: &[Rational], c: &[Rational]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    assert_eq!(b.len(), m, "rhs length");
    assert!(a.iter().all(|r| r.len() == n), "ragged constraint matrix");

    // Columns: n structural, then m artificials.
    let width = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, (ai, bi)) in a.iter().zip(b).enumerate() {
        let flip = bi.is_negative();
        let mut row: Vec<Rational> = ai.iter().map(|v| if flip { -v } else { v.clone() }).collect();
        row.extend((0..m).map(|k| if k == i { Rational::one() } else { Rational::zero() }));
        row.push(if flip { -bi } else { bi.clone() });
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        basis: (n..width).collect(),
        width,
    };

    let phase1: Vec<Rational> = (0..width)
        .map(|j| if j >= n { Rational::one() } else { Rational::zero() })
        .collect();
    let bounded = t.minimize(&phase1, &|_| true);
    debug_assert!(bounded, "phase 1 is bounded below by 0");
    let residual: Rational = (0..t.rows.len())
        .filter(|&i| t.basis[i] >= n)
        .map(|i| t.rhs(i).clone())
        .sum();
    if residual.is_positive() {
        return LpOutcome::Infeasible { residual };
    }

    // Drive zero-level artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                Some(j) => t.pivot(i, j),
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    let mut phase2: Vec<Rational> = c.iter().map(|v| -v).collect();
    phase2.extend((0..m).map(|_| Rational::zero()));
    if !t.minimize(&phase2, &|j| j < n) {
        return LpOutcome::Unbounded;
    }

    let mut solution = vec![Rational::zero(); n];
    for (i, &bv) in t.basis.iter().enumerate() {
        if bv < n {
            solution[bv] = t.rhs(i).clone();
        }
    }
    let value = solution.iter().zip(c).map(|(y, ci)| y * ci).sum();
    LpOutcome::Optimal { value, solution }
}
