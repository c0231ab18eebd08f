//! Symmetric eigendecomposition by cyclic Jacobi rotations.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Sweep cap for the cyclic Jacobi iteration.
pub const MAX_SWEEPS: usize = 100;

/// Default relative off-diagonal threshold: stop once `off(A) <= tol * ‖A‖_F`.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Entrywise symmetry tolerance (scaled by `max(1, max|A|)`).
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Eigenpairs of a symmetric matrix, eigenvalues in nonincreasing order.
/// Column `i` of `vectors` pairs with `values[i]`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        *self.values.last().expect("spectrum is never empty")
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    /// `V · diag(f(λ)) · Vᵀ`, exactly symmetric.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let scaled: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let vs = self.vectors.scale_columns(&scaled);
        let m = &vs * &self.vectors.transpose();
        Matrix::from_fn(m.rows(), m.cols(), |i, j| if i <= j { m[(i, j)] } else { m[(j, i)] })
    }
}

pub fn sym_eig(a: &Matrix) -> Result<Spectrum> {
    sym_eig_with_tol(a, DEFAULT_TOL)
}

/// Eigendecomposition of a symmetric matrix.
///
/// `tol` is the relative off-diagonal Frobenius threshold at which the
/// iteration stops.
pub fn sym_eig_with_tol(a: &Matrix, tol: f64) -> Result<Spectrum> {
    if !a.is_square() {
        return Err(Error::shape(format!(
            "eigendecomposition of non-square {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let asym = a.max_asymmetry();
    if asym > SYMMETRY_TOL * a.max_abs().max(1.0) {
        return Err(Error::NotSymmetric { max_asym: asym });
    }

    let n = a.rows();
    // Work on the symmetrized copy.
    let mut w = Matrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut v = Matrix::identity(n);
    let scale = w.norm_fro();

    let off = |w: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += w[(i, j)] * w[(i, j)];
            }
        }
        (2.0 * s).sqrt()
    };

    let mut residual = off(&w);
    let mut sweeps = 0;
    while residual > tol * scale {
        if sweeps == MAX_SWEEPS {
            return Err(Error::Convergence {
                iterations: sweeps,
                residual: residual / scale,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut w, &mut v, p, q);
            }
        }
        sweeps += 1;
        residual = off(&w);
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag = w.diagonal();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = v.columns(&order);
    Ok(Spectrum { values, vectors })
}

/// One Jacobi rotation zeroing `w[p][q]`, accumulated into `v`.
fn rotate(w: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = w[(p, q)];
    if apq == 0.0 {
        return;
    }
    let app = w[(p, p)];
    let aqq = w[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = w.rows();

    for k in 0..n {
        let wkp = w[(k, p)];
        let wkq = w[(k, q)];
        w[(k, p)] = c * wkp - s * wkq;
        w[(k, q)] = s * wkp + c * wkq;
    }
    for k in 0..n {
        let wpk = w[(p, k)];
        let wqk = w[(q, k)];
        w[(p, k)] = c * wpk - s * wqk;
        w[(q, k)] = s * wpk + c * wqk;
    }
    w[(p, q)] = 0.0;
    w[(q, p)] = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}
