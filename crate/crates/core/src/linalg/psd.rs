use crate::error::{Error, Result};
use crate::linalg::{sym_eig, Matrix};

/// Negative eigenvalues down to `-PSD_SLACK·‖S‖` are accepted as roundoff.
pub const PSD_SLACK: f64 = 1e-8;

/// Default regularization for [`inv_sqrt_psd`]: `1e-14 · trace(S) / d`.
pub fn default_eps(s: &Matrix) -> f64 {
    1e-14 * s.trace().max(0.0) / s.rows() as f64
}

/// `S^{-1/2}` for a symmetric PSD matrix, computed as `V · diag((λ+eps)^{-1/2}) · Vᵀ`.
///
/// Eigenvalues inside the roundoff slack are clamped to zero before adding
/// `eps`; a zero eigenvalue with `eps = 0` is an error.
pub fn inv_sqrt_psd(s: &Matrix, eps: f64) -> Result<Matrix> {
    if eps < 0.0 || !eps.is_finite() {
        return Err(Error::domain(format!("regularization eps = {eps}")));
    }
    let spec = sym_eig(s)?;
    let scale = spec.values[0].abs().max(spec.min().abs());
    if spec.min() < -PSD_SLACK * scale {
        return Err(Error::NotPsd {
            min_eig: spec.min(),
        });
    }
    if spec.min().max(0.0) + eps <= 0.0 {
        return Err(Error::Degenerate(
            "singular matrix has no inverse square root without regularization".into(),
        ));
    }
    Ok(spec.reconstruct_with(|l| 1.0 / (l.max(0.0) + eps).sqrt()))
}
