//! Thin SVD by one-sided (Hestenes) Jacobi orthogonalization.

use crate::error::{Error, Result};
use crate::linalg::matrix::{dot, norm};
use crate::linalg::{eig::MAX_SWEEPS, Matrix};

/// Column pairs are considered orthogonal once `|uᵢ·uⱼ| <= ORTH_TOL·‖uᵢ‖‖uⱼ‖`.
const ORTH_TOL: f64 = 1e-15;

/// Singular values below this are treated as zero when recovering `U`.
const TINY: f64 = 1e-300;

/// `A = U · diag(s) · Vᵀ` with `r = min(m, n)` columns in `U` and `V`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    pub fn reconstruct(&self) -> Matrix {
        &self.u.scale_columns(&self.s) * &self.v.transpose()
    }
}

pub fn svd(a: &Matrix) -> Result<Svd> {
    if a.rows() >= a.cols() {
        svd_tall(a)
    } else {
        let t = svd_tall(&a.transpose())?;
        Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        })
    }
}

fn svd_tall(a: &Matrix) -> Result<Svd> {
    let (m, n) = a.shape();
    // Columns stored contiguously.
    let mut u: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let mut sweeps = 0;
    loop {
        let mut worst = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(&u[p], &u[p]);
                let beta = dot(&u[q], &u[q]);
                let gamma = dot(&u[p], &u[q]);
                if gamma == 0.0 {
                    continue;
                }
                let rel = gamma.abs() / (alpha * beta).sqrt();
                worst = worst.max(rel);
                if rel <= ORTH_TOL {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut u, p, q, c, s);
                rotate_pair(&mut v, p, q, c, s);
            }
        }
        sweeps += 1;
        if worst <= ORTH_TOL {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::Convergence {
                iterations: sweeps,
                residual: worst,
            });
        }
    }

    let s: Vec<f64> = u.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]).then(i.cmp(&j)));

    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut deficient = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        if s[j] > TINY {
            u_cols.push(u[j].iter().map(|x| x / s[j]).collect());
        } else {
            u_cols.push(vec![0.0; m]);
            deficient.push(k);
        }
    }
    complete_orthonormal(&mut u_cols, &deficient);

    let s_sorted: Vec<f64> = order.iter().map(|&j| s[j]).collect();
    let v_sorted: Vec<Vec<f64>> = order.iter().map(|&j| v[j].clone()).collect();
    Ok(Svd {
        u: Matrix::from_fn(m, n, |i, k| u_cols[k][i]),
        s: s_sorted,
        v: Matrix::from_fn(n, n, |i, k| v_sorted[k][i]),
    })
}

fn rotate_pair(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// Fills the listed slots with unit vectors orthogonal to every other column,
/// trying standard basis vectors in turn (Gram-Schmidt, applied twice).
fn complete_orthonormal(cols: &mut [Vec<f64>], slots: &[usize]) {
    if slots.is_empty() {
        return;
    }
    let m = cols[0].len();
    let mut candidate = 0;
    for &slot in slots {
        loop {
            let mut e = vec![0.0; m];
            e[candidate % m] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for (k, c) in cols.iter().enumerate() {
                    if k == slot {
                        continue;
                    }
                    let proj = dot(&e, c);
                    for (x, y) in e.iter_mut().zip(c) {
                        *x -= proj * y;
                    }
                }
            }
            let len = norm(&e);
            if len > 1e-8 {
                cols[slot] = e.iter().map(|x| x / len).collect();
                break;
            }
        }
    }
}

/// Condition number `σmax/σmin`; `+∞` when `σmin < 1e-300`.
pub fn cond(a: &Matrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::shape(format!(
            "condition number of non-square {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let s = svd(a)?.s;
    let smin = *s.last().unwrap();
    if smin < TINY {
        return Ok(f64::INFINITY);
    }
    Ok(s[0] / smin)
}
