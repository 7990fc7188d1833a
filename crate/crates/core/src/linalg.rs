//! Dense linear solves by pivoted Gaussian elimination, exact in rational mode.

use crate::error::{Error, Result};
use crate::mdp::Row;
use crate::scalar::{NumericMode, Scalar};

/// Solves `a x = b` in place. Floats use partial pivoting on the largest
/// magnitude; rationals take the first nonzero pivot (elimination is exact).
pub fn solve_dense<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput("linear system is not square".into()));
    }
    for col in 0..n {
        let pivot = match T::MODE {
            NumericMode::Float => (col..n)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).expect("finite entries"))
                .filter(|&i| a[i][col].abs().to_f64_lossy() > 1e-300),
            NumericMode::Rational => (col..n).find(|&i| !a[i][col].is_zero()),
        };
        let Some(p) = pivot else {
            return Err(Error::InvalidInput("singular linear system".into()));
        };
        a.swap(col, p);
        b.swap(col, p);
        let inv = T::one() / a[col][col].clone();
        for row in col + 1..n {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone() * inv.clone();
            for k in col..n {
                let delta = factor.clone() * a[col][k].clone();
                a[row][k] = a[row][k].clone() - delta;
            }
            let delta = factor * b[col].clone();
            b[row] = b[row].clone() - delta;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc = acc - a[row][k].clone() * x[k].clone();
        }
        x[row] = acc / a[row][row].clone();
    }
    Ok(x)
}

/// `(I − γ P) v = r` for a chain given by sparse rows.
pub fn solve_discounted_chain<T: Scalar>(rows: &[Row<T>], rewards: &[T], gamma: &T) -> Result<Vec<T>> {
    let n = rows.len();
    let mut a = vec![vec![T::zero(); n]; n];
    for (s, row) in rows.iter().enumerate() {
        a[s][s] = T::one();
        for (t, p) in row {
            a[s][*t] = a[s][*t].clone() - gamma.clone() * p.clone();
        }
    }
    solve_dense(a, rewards.to_vec())
}

/// Stationary distribution of a chain with exactly one closed class
/// `class`; states outside it get mass zero.
pub fn stationary_on_class<T: Scalar>(rows: &[Row<T>], class: &[usize]) -> Result<Vec<T>> {
    let m = class.len();
    let mut local = vec![usize::MAX; rows.len()];
    for (i, &s) in class.iter().enumerate() {
        local[s] = i;
    }
    // μ (I − P) = 0 transposed, with the last equation replaced by Σ μ = 1
    let mut a = vec![vec![T::zero(); m]; m];
    for (j, &s) in class.iter().enumerate() {
        a[j][j] = a[j][j].clone() + T::one();
        for (t, p) in &rows[s] {
            let i = local[*t];
            a[i][j] = a[i][j].clone() - p.clone();
        }
    }
    let mut b = vec![T::zero(); m];
    if m > 0 {
        a[m - 1] = vec![T::one(); m];
        b[m - 1] = T::one();
    }
    let mu_class = solve_dense(a, b)?;
    let mut mu = vec![T::zero(); rows.len()];
    for (i, &s) in class.iter().enumerate() {
        mu[s] = mu_class[i].clone();
    }
    Ok(mu)
}
