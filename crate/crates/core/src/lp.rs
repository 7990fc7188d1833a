//! Dense two-phase simplex with Bland's anti-cycling rule.
//!
//! Solves `min cᵀx` subject to rows `aᵢᵀx {≤,≥,=} bᵢ` and `x ≥ 0`.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coefficients: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// rows × (cols + 1); last column is the right-hand side
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let inv = 1.0 / self.t[row][col];
        for x in self.t[row].iter_mut() {
            *x *= inv;
        }
        let pivot_row = self.t[row].clone();
        for (r, line) in self.t.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let f = line[col];
            if f != 0.0 {
                for (x, p) in line.iter_mut().zip(&pivot_row) {
                    *x -= f * p;
                }
                line[col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// Minimizes `cost` over the columns allowed by `allowed`; returns false
    /// if unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: &dyn Fn(usize) -> bool) -> Result<bool> {
        for _ in 0..MAX_PIVOTS {
            // reduced costs c_j − c_Bᵀ B⁻¹ A_j
            let entering = (0..self.cols).filter(|&j| allowed(j) && !self.basis.contains(&j)).find(|&j| {
                let reduced = cost[j] - self.basis.iter().enumerate().map(|(r, &b)| cost[b] * self.t[r][j]).sum::<f64>();
                reduced < -PIVOT_TOL
            });
            let Some(col) = entering else { return Ok(true) };
            let rhs = self.cols;
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.t.len() {
                let a = self.t[r][col];
                if a > PIVOT_TOL {
                    let ratio = self.t[r][rhs] / a;
                    leaving = match leaving {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - 1e-12
                                || ((ratio - lratio).abs() <= 1e-12 && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = leaving else { return Ok(false) };
            self.pivot(row, col);
        }
        Err(Error::IterationCap { what: "simplex", iterations: MAX_PIVOTS })
    }
}

/// Solves the LP with `n_vars` nonnegative variables.
pub fn solve_lp(objective: &[f64], constraints: &[Constraint]) -> Result<LpOutcome> {
    let n = objective.len();
    if constraints.iter().any(|c| c.coefficients.len() != n) {
        return Err(Error::InvalidInput("constraint width does not match the objective".into()));
    }
    // normalize to nonnegative right-hand sides
    let rows: Vec<(Vec<f64>, Sense, f64)> = constraints
        .iter()
        .map(|c| {
            if c.rhs < 0.0 {
                let flipped = match c.sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
                (c.coefficients.iter().map(|x| -x).collect(), flipped, -c.rhs)
            } else {
                (c.coefficients.clone(), c.sense, c.rhs)
            }
        })
        .collect();
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let cols = n + n_slack + n_art;
    let mut t = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0; m];
    let (mut slack, mut art) = (n, n + n_slack);
    for (i, (coef, sense, rhs)) in rows.iter().enumerate() {
        t[i][..n].copy_from_slice(coef);
        t[i][cols] = *rhs;
        match sense {
            Sense::Le => {
                t[i][slack] = 1.0;
                basis[i] = slack;
                slack += 1;
            }
            Sense::Ge => {
                t[i][slack] = -1.0;
                slack += 1;
                t[i][art] = 1.0;
                basis[i] = art;
                art += 1;
            }
            Sense::Eq => {
                t[i][art] = 1.0;
                basis[i] = art;
                art += 1;
            }
        }
    }
    let mut tab = Tableau { t, basis, cols };
    let first_art = n + n_slack;

    if n_art > 0 {
        let phase1: Vec<f64> = (0..cols).map(|j| if j >= first_art { 1.0 } else { 0.0 }).collect();
        tab.optimize(&phase1, &|_| true)?;
        let infeasibility: f64 = tab.basis.iter().enumerate().map(|(r, &b)| phase1[b] * tab.t[r][cols]).sum();
        let scale = 1.0 + rows.iter().map(|r| r.2).fold(0.0, f64::max);
        if infeasibility > 1e-9 * scale {
            return Ok(LpOutcome::Infeasible);
        }
        // drive remaining (zero-level) artificials out of the basis
        for r in 0..m {
            if tab.basis[r] >= first_art {
                if let Some(col) = (0..first_art).find(|&j| tab.t[r][j].abs() > PIVOT_TOL) {
                    tab.pivot(r, col);
                }
            }
        }
    }
    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(objective);
    if !tab.optimize(&cost, &|j| j < first_art)? {
        return Ok(LpOutcome::Unbounded);
    }
    let mut x = vec![0.0; n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.t[r][cols];
        }
    }
    let objective_value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpOutcome::Optimal { x, objective: objective_value })
}
