use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::random::{random_orthogonal_with, seeded_rng};
use crate::linalg::{cond, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeKind {
    Identity,
    Orthogonal,
    Diagonal,
    General,
    Whitening,
}

impl fmt::Display for GaugeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GaugeKind::Identity => "identity",
            GaugeKind::Orthogonal => "orthogonal",
            GaugeKind::Diagonal => "diagonal",
            GaugeKind::General => "general",
            GaugeKind::Whitening => "whitening",
        };
        f.write_str(s)
    }
}

impl FromStr for GaugeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(GaugeKind::Identity),
            "orthogonal" => Ok(GaugeKind::Orthogonal),
            "diagonal" => Ok(GaugeKind::Diagonal),
            "general" => Ok(GaugeKind::General),
            "whitening" => Ok(GaugeKind::Whitening),
            other => Err(Error::Config(format!("unknown gauge kind `{other}`"))),
        }
    }
}

/// An invertible change of hidden coordinates `h ↦ D h`, with `D⁻¹` kept alongside.
#[derive(Debug, Clone)]
pub struct GaugeTransform {
    d: Matrix,
    d_inv: Matrix,
    kappa: f64,
    kind: GaugeKind,
}

impl GaugeTransform {
    pub fn identity(dim: usize) -> Self {
        GaugeTransform {
            d: Matrix::identity(dim),
            d_inv: Matrix::identity(dim),
            kappa: 1.0,
            kind: GaugeKind::Identity,
        }
    }

    /// Wraps an explicit pair. `D · D⁻¹` must be the identity within 1e-8.
    pub fn from_parts(d: Matrix, d_inv: Matrix, kind: GaugeKind) -> Result<Self> {
        if !d.is_square() || d.shape() != d_inv.shape() {
            return Err(Error::shape("gauge matrices must be square and equal-sized"));
        }
        let err = (&d * &d_inv).max_abs_diff(&Matrix::identity(d.rows()));
        if err > 1e-8 {
            return Err(Error::Degenerate(format!(
                "D·D⁻¹ deviates from identity by {err:e}"
            )));
        }
        let kappa = cond(&d)?;
        Ok(GaugeTransform {
            d,
            d_inv,
            kappa,
            kind,
        })
    }

    pub fn dim(&self) -> usize {
        self.d.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.d
    }

    pub fn inverse(&self) -> &Matrix {
        &self.d_inv
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn kind(&self) -> GaugeKind {
        self.kind
    }

    /// The gauge `h ↦ other.D · self.D · h` (apply `self` first).
    pub fn then(&self, other: &GaugeTransform) -> Result<GaugeTransform> {
        if self.dim() != other.dim() {
            return Err(Error::shape("composing gauges of different dimension"));
        }
        let d = &other.d * &self.d;
        let d_inv = &self.d_inv * &other.d_inv;
        let kappa = cond(&d)?;
        Ok(GaugeTransform {
            d,
            d_inv,
            kappa,
            kind: GaugeKind::General,
        })
    }
}

/// Singular values `κ^{i/(d-1)}`, log-uniform from 1 to κ.
fn log_uniform_spectrum(dim: usize, kappa: f64) -> Vec<f64> {
    if dim == 1 {
        return vec![1.0];
    }
    let top = (dim - 1) as f64;
    (0..dim)
        .map(|i| if i == dim - 1 { kappa } else { kappa.powf(i as f64 / top) })
        .collect()
}

/// Builds `D = U · diag(s) · Vᵀ` with `cond(D) = kappa`.
///
/// `U` and `V` are drawn from one seeded stream (U first). Orthogonal gauges
/// force `s = 1`; diagonal gauges use `U = V = I`.
pub fn make_gauge(dim: usize, kappa: f64, kind: GaugeKind, seed: u64) -> Result<GaugeTransform> {
    if dim == 0 {
        return Err(Error::domain("gauge of dimension 0"));
    }
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(Error::domain(format!("kappa must be finite and >= 1, got {kappa}")));
    }
    if dim == 1 && kappa != 1.0 && matches!(kind, GaugeKind::General | GaugeKind::Diagonal) {
        return Err(Error::domain("a 1-dimensional gauge always has kappa = 1"));
    }

    let s = match kind {
        GaugeKind::Identity | GaugeKind::Orthogonal => vec![1.0; dim],
        GaugeKind::Diagonal | GaugeKind::General => log_uniform_spectrum(dim, kappa),
        GaugeKind::Whitening => {
            return Err(Error::domain(
                "whitening gauges are derived from data, not sampled",
            ))
        }
    };
    let (u, v) = match kind {
        GaugeKind::Identity | GaugeKind::Diagonal => (Matrix::identity(dim), Matrix::identity(dim)),
        GaugeKind::Orthogonal | GaugeKind::General => {
            let mut rng = seeded_rng(seed);
            let u = random_orthogonal_with(dim, &mut rng)?;
            let v = random_orthogonal_with(dim, &mut rng)?;
            (u, v)
        }
        GaugeKind::Whitening => unreachable!(),
    };

    let inv_s: Vec<f64> = s.iter().map(|x| 1.0 / x).collect();
    let d = &u.scale_columns(&s) * &v.transpose();
    let d_inv = &v.scale_columns(&inv_s) * &u.transpose();
    // s is ascending
    let kappa = s[dim - 1] / s[0];
    Ok(GaugeTransform {
        d,
        d_inv,
        kappa,
        kind,
    })
}
