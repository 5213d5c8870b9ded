//! Dense two-phase simplex with Bland's rule.
//!
//! Solves `max c.x  s.t.  A x <= b` with `x` free. Free variables are split
//! as `x = x+ - x-`; rows with negative right-hand side get an artificial
//! variable and phase 1 drives the artificials to zero. Problems here have at
//! most a few dozen rows, so the tableau is kept dense.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub const LP_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 50_000;

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub maximizer: Vec<f64>,
}

struct Tableau {
    rows: usize,
    cols: usize,
    // (rows + 1) x (cols + 1); last row is the objective, last column the rhs.
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.cols + 1) + c]
    }

    #[inline]
    fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let p = self.at(pr, pc);
        for c in 0..w {
            *self.at_mut(pr, c) /= p;
        }
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let f = self.at(r, pc);
            if f != 0.0 {
                for c in 0..w {
                    let v = self.at(pr, c);
                    if v != 0.0 {
                        *self.at_mut(r, c) -= f * v;
                    }
                }
                *self.at_mut(r, pc) = 0.0;
            }
        }
        self.basis[pr] = pc;
    }

    /// Loads `cost` (maximize) into the objective row as reduced costs.
    fn set_objective(&mut self, cost: &[f64]) {
        for c in 0..=self.cols {
            *self.at_mut(self.rows, c) = if c < self.cols { cost[c] } else { 0.0 };
        }
        for r in 0..self.rows {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for c in 0..=self.cols {
                    let v = self.at(r, c);
                    *self.at_mut(self.rows, c) -= cb * v;
                }
            }
        }
    }

    /// Runs simplex iterations with Bland's rule. Columns with
    /// `allowed[c] == false` never enter. Returns `Err(Unbounded)` when an
    /// improving column has no positive entry.
    fn optimize(&mut self, allowed: &[bool], pivots: &mut usize) -> Result<()> {
        loop {
            let entering = (0..self.cols).find(|&c| allowed[c] && self.at(self.rows, c) > LP_TOL);
            let Some(pc) = entering else {
                return Ok(());
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > LP_TOL {
                    let ratio = self.rhs(r) / a;
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            if ratio < bratio - 1e-12
                                || (ratio <= bratio + 1e-12 && self.basis[r] < self.basis[br])
                            {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    }
                }
            }
            let Some((pr, _)) = best else {
                return Err(Error::Unbounded);
            };
            self.pivot(pr, pc);
            *pivots += 1;
            if *pivots > MAX_PIVOTS {
                return Err(Error::IterationLimit(MAX_PIVOTS));
            }
        }
    }
}

/// Maximizes `objective . x` over `{x : rows[i] . x <= rhs[i]}`.
pub fn maximize(objective: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> Result<LpSolution> {
    let n = objective.len();
    let m = rows.len();
    debug_assert_eq!(rhs.len(), m);
    let art_rows: Vec<usize> = (0..m).filter(|&i| rhs[i] < 0.0).collect();
    let n_art = art_rows.len();
    let cols = 2 * n + m + n_art;
    let mut t = Tableau {
        rows: m,
        cols,
        data: vec![0.0; (m + 1) * (cols + 1)],
        basis: vec![0; m],
    };
    let mut art_idx = 0;
    for i in 0..m {
        let sign = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            *t.at_mut(i, j) = sign * rows[i][j];
            *t.at_mut(i, n + j) = -sign * rows[i][j];
        }
        *t.at_mut(i, 2 * n + i) = sign;
        *t.at_mut(i, cols) = sign * rhs[i];
        if rhs[i] < 0.0 {
            let a = 2 * n + m + art_idx;
            *t.at_mut(i, a) = 1.0;
            t.basis[i] = a;
            art_idx += 1;
        } else {
            t.basis[i] = 2 * n + i;
        }
    }
    let mut pivots = 0;
    let is_art = |c: usize| c >= 2 * n + m;

    if n_art > 0 {
        let mut cost = vec![0.0; cols];
        for c in cost.iter_mut().skip(2 * n + m) {
            *c = -1.0;
        }
        t.set_objective(&cost);
        let allowed = vec![true; cols];
        match t.optimize(&allowed, &mut pivots) {
            Ok(()) => {}
            // phase 1 is bounded above by zero
            Err(Error::Unbounded) => return Err(Error::InfeasiblePolytope),
            Err(e) => return Err(e),
        }
        let infeas: f64 = (0..m)
            .filter(|&r| is_art(t.basis[r]))
            .map(|r| t.rhs(r))
            .sum();
        if infeas > LP_TOL {
            return Err(Error::InfeasiblePolytope);
        }
        // Drive remaining (zero-valued) artificials out of the basis.
        for r in 0..m {
            if is_art(t.basis[r]) {
                if let Some(pc) = (0..2 * n + m).find(|&c| t.at(r, c).abs() > LP_TOL) {
                    t.pivot(r, pc);
                }
            }
        }
    }

    let mut cost = vec![0.0; cols];
    for j in 0..n {
        cost[j] = objective[j];
        cost[n + j] = -objective[j];
    }
    t.set_objective(&cost);
    let allowed: Vec<bool> = (0..cols).map(|c| !is_art(c)).collect();
    t.optimize(&allowed, &mut pivots)?;

    let mut x = vec![0.0; n];
    for r in 0..m {
        let b = t.basis[r];
        let v = t.rhs(r);
        if b < n {
            x[b] += v;
        } else if b < 2 * n {
            x[b - n] -= v;
        }
    }
    let value = x.iter().zip(objective).map(|(a, b)| a * b).sum();
    Ok(LpSolution {
        value,
        maximizer: x,
    })
}
