//! Local dynamics of the hidden representation under parameter updates.
//!
//! For `h(x; θ)` the Jacobian `J = ∂h/∂θ` linearizes the response to a small
//! update, `δh ≈ J δθ`. Its pullback `G = JᵀJ` is the quadratic form
//! `‖δh‖² ≈ δθᵀ G δθ`, and an update distribution with covariance `Ω` moves
//! representations with covariance `J Ω Jᵀ`. Under a gauge `D` these
//! transform as `J ↦ D J` and `G ↦ Jᵀ DᵀD J`.

use crate::error::{Error, Result};
use crate::linalg::{sym_eig, Matrix, Spectrum};
use crate::model::MlpModel;

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// `∂h/∂θ` at one input: d_h rows, one column per entry of `θ`.
#[derive(Debug, Clone)]
pub struct RepJacobian {
    pub j: Matrix,
    pub x: Vec<f64>,
}

impl RepJacobian {
    /// Relative deviation `max|A − B| / max(max|B|, tiny)`.
    pub fn relative_error(&self, reference: &RepJacobian) -> f64 {
        let scale = reference.j.max_abs().max(f64::MIN_POSITIVE);
        self.j.max_abs_diff(&reference.j) / scale
    }
}

/// Exact Jacobian of `h = D · tanh(W1 x + b1)` (with `D = I` when ungauged).
/// Columns of the `W2`/`b2` blocks are zero.
pub fn rep_jacobian_analytic(m: &MlpModel, x: &[f64]) -> Result<RepJacobian> {
    let d_in = m.input_dim();
    if x.len() != d_in {
        return Err(Error::shape(format!("probe of length {} for d_in = {d_in}", x.len())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("non-finite probe input".into()));
    }
    let d_h = m.hidden_dim();
    let z = m.w1().mul_vec(x);
    let slope: Vec<f64> = z
        .iter()
        .zip(m.b1())
        .map(|(z, b)| {
            let t = (z + b).tanh();
            1.0 - t * t
        })
        .collect();
    let gauge = m.gauge();
    // column `a` of D scaled by tanh'(z_a)
    let col = |row: usize, a: usize| -> f64 {
        let g = gauge.map_or(if row == a { 1.0 } else { 0.0 }, |g| g[(row, a)]);
        g * slope[a]
    };

    let b1_offset = d_h * d_in;
    let mut j = Matrix::zeros(d_h, m.param_count());
    for row in 0..d_h {
        for a in 0..d_h {
            let c = col(row, a);
            if c == 0.0 {
                continue;
            }
            for (b, &xb) in x.iter().enumerate() {
                j[(row, a * d_in + b)] = c * xb;
            }
            j[(row, b1_offset + a)] = c;
        }
    }
    Ok(RepJacobian { j, x: x.to_vec() })
}

/// Central differences `(h(θ + s eⱼ) − h(θ − s eⱼ)) / 2s`, gauge held fixed.
pub fn rep_jacobian_fd(m: &MlpModel, x: &[f64], step: f64) -> Result<RepJacobian> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::domain(format!("finite-difference step must be positive, got {step}")));
    }
    if x.len() != m.input_dim() {
        return Err(Error::shape(format!(
            "probe of length {} for d_in = {}",
            x.len(),
            m.input_dim()
        )));
    }
    let theta = m.params();
    let d_h = m.hidden_dim();
    let mut j = Matrix::zeros(d_h, theta.len());
    let mut probe = theta.clone();
    for k in 0..theta.len() {
        probe[k] = theta[k] + step;
        let up = m.with_params(&probe)?.hidden(x)?;
        probe[k] = theta[k] - step;
        let down = m.with_params(&probe)?.hidden(x)?;
        probe[k] = theta[k];
        for row in 0..d_h {
            j[(row, k)] = (up[row] - down[row]) / (2.0 * step);
        }
    }
    Ok(RepJacobian { j, x: x.to_vec() })
}

/// `G = JᵀJ`, symmetric positive semidefinite.
#[derive(Debug, Clone)]
pub struct PullbackMetric {
    pub g: Matrix,
}

impl PullbackMetric {
    pub fn quadratic_form(&self, delta: &[f64]) -> f64 {
        crate::linalg::dot(delta, &self.g.mul_vec(delta))
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        sym_eig(&self.g)
    }

    /// Spectrum of the principal submatrix on the listed parameter indices.
    pub fn block_spectrum(&self, idx: &[usize]) -> Result<Spectrum> {
        let block = Matrix::from_fn(idx.len(), idx.len(), |i, j| self.g[(idx[i], idx[j])]);
        sym_eig(&block)
    }
}

pub fn pullback_metric(j: &RepJacobian) -> PullbackMetric {
    PullbackMetric {
        g: j.j.transpose().gram_rows(),
    }
}

/// `J Ω Jᵀ`, the covariance of `J δθ` when `δθ` has covariance `Ω`.
pub fn rep_change_cov(j: &RepJacobian, omega: &Matrix) -> Result<Matrix> {
    let p = j.j.cols();
    if omega.shape() != (p, p) {
        return Err(Error::shape(format!(
            "Ω is {:?}, Jacobian has {p} parameter columns",
            omega.shape()
        )));
    }
    let jo = j.j.try_matmul(omega)?;
    let out = &jo * &j.j.transpose();
    // symmetrize away roundoff
    Ok(Matrix::from_fn(out.rows(), out.cols(), |a, b| {
        0.5 * (out[(a, b)] + out[(b, a)])
    }))
}

/// Diagonal `Ω` with one variance per parameter block `(W1, b1, W2, b2)`.
pub fn block_diagonal_omega(m: &MlpModel, variances: [f64; 4]) -> Result<Matrix> {
    if variances.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::domain("block variances must be finite and >= 0"));
    }
    let (d_in, d_h, c) = (m.input_dim(), m.hidden_dim(), m.classes());
    let sizes = [d_h * d_in, d_h, c * d_h, c];
    let diag: Vec<f64> = sizes
        .iter()
        .zip(variances)
        .flat_map(|(&n, v)| std::iter::repeat_n(v, n))
        .collect();
    Ok(Matrix::from_diag(&diag))
}

/// Indices of the parameters the hidden representation depends on (`W1`, `b1`).
pub fn representation_params(m: &MlpModel) -> std::ops::Range<usize> {
    0..m.hidden_dim() * (m.input_dim() + 1)
}
