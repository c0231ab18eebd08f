//! Representation-comparison indices with known invariance classes:
//! linear CKA (orthogonal maps and isotropic scaling) and SVCCA (any
//! invertible linear map, at full energy).

use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{center_rows, RepresentationSet};
use crate::linalg::{inv_sqrt_psd, svd, Matrix};

/// Default fraction of squared singular-value mass kept by SVCCA.
pub const DEFAULT_ENERGY: f64 = 0.99;

/// Ridge added to each CCA covariance, relative to its trace.
pub const CCA_RIDGE: f64 = 1e-10;

/// Singular values below `RANK_TOL · σmax` are outside the numerical rank.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimilarityMethod {
    LinearCka,
    Svcca,
}

impl fmt::Display for SimilarityMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimilarityMethod::LinearCka => "linear_cka",
            SimilarityMethod::Svcca => "svcca",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityScore {
    pub value: f64,
    pub method: SimilarityMethod,
    /// Ranks kept by the SVCCA energy truncation, for each argument.
    pub retained_dims: Option<(usize, usize)>,
}

fn check_samples(a: &RepresentationSet, b: &RepresentationSet) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::shape(format!(
            "representations over {} and {} samples",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// `‖Ȳ X̄ᵀ‖²_F / (‖X̄ X̄ᵀ‖_F ‖Ȳ Ȳᵀ‖_F)` on row-mean-centered matrices.
pub fn linear_cka(a: &RepresentationSet, b: &RepresentationSet) -> Result<SimilarityScore> {
    check_samples(a, b)?;
    let x = a.centered();
    let y = b.centered();
    let xx = x.gram_rows().norm_fro();
    let yy = y.gram_rows().norm_fro();
    if xx == 0.0 || yy == 0.0 {
        return Err(Error::Degenerate("constant representation has no CKA".into()));
    }
    let yx = (&y * &x.transpose()).norm_fro();
    Ok(SimilarityScore {
        value: yx * yx / (xx * yy),
        method: SimilarityMethod::LinearCka,
        retained_dims: None,
    })
}

pub fn svcca_mean_corr(
    a: &RepresentationSet,
    b: &RepresentationSet,
    energy: f64,
) -> Result<SimilarityScore> {
    svcca_with_ridge(a, b, energy, CCA_RIDGE)
}

/// SVCCA with an explicit relative ridge.
///
/// Each side is centered and reduced to the leading right singular vectors
/// holding `energy` of the squared singular-value mass. CCA then runs on
/// those reduced coordinates through the SVD of `Σ₁^{-1/2} Σ₁₂ Σ₂^{-1/2}`;
/// the score is the mean canonical correlation.
pub fn svcca_with_ridge(
    a: &RepresentationSet,
    b: &RepresentationSet,
    energy: f64,
    ridge: f64,
) -> Result<SimilarityScore> {
    check_samples(a, b)?;
    if !(energy > 0.0 && energy <= 1.0) {
        return Err(Error::domain(format!("energy must be in (0, 1], got {energy}")));
    }
    if !(ridge >= 0.0) {
        return Err(Error::domain(format!("ridge must be >= 0, got {ridge}")));
    }
    let xa = reduced_coordinates(a.matrix(), energy)?;
    let xb = reduced_coordinates(b.matrix(), energy)?;
    let n = a.len() as f64;

    let cov = |m: &Matrix| {
        let c = m.gram_rows().scale(1.0 / n);
        let r = ridge * c.trace();
        &c + &Matrix::identity(c.rows()).scale(r)
    };
    let wa = inv_sqrt_psd(&cov(&xa), 0.0)?;
    let wb = inv_sqrt_psd(&cov(&xb), 0.0)?;
    let cross = (&xa * &xb.transpose()).scale(1.0 / n);
    let m = &(&wa * &cross) * &wb;
    let rho = svd(&m)?.s;
    let mean = rho.iter().sum::<f64>() / rho.len() as f64;
    Ok(SimilarityScore {
        value: mean.min(1.0),
        method: SimilarityMethod::Svcca,
        retained_dims: Some((xa.rows(), xb.rows())),
    })
}

/// Rows of `√n · V_rᵀ`: an orthonormal basis (up to the `√n` scale) of the
/// retained row space of the centered `h`.
fn reduced_coordinates(h: &Matrix, energy: f64) -> Result<Matrix> {
    let centered = center_rows(h);
    let dec = svd(&centered)?;
    let smax = dec.s[0];
    if smax == 0.0 {
        return Err(Error::Degenerate("representation has rank 0".into()));
    }
    let sq: Vec<f64> = dec
        .s
        .iter()
        .take_while(|&&s| s > RANK_TOL * smax)
        .map(|s| s * s)
        .collect();
    let total: f64 = sq.iter().sum();
    let mut cum = 0.0;
    let mut rank = 0;
    for v in &sq {
        cum += v;
        rank += 1;
        if cum >= energy * total {
            break;
        }
    }
    let scale = (h.cols() as f64).sqrt();
    Ok(Matrix::from_fn(rank, h.cols(), |i, j| dec.v[(j, i)] * scale))
}
