//! Dense matrices, spectral primitives and seeded random constructors.

mod eig;
mod gauge;
mod matrix;
mod psd;
mod random;
mod svd;

pub use eig::{sym_eig, sym_eig_with_tol, Spectrum, DEFAULT_TOL, MAX_SWEEPS};
pub use gauge::{make_gauge, GaugeKind, GaugeTransform};
pub use matrix::{dot, norm, Matrix};
pub use psd::{default_eps, inv_sqrt_psd, PSD_SLACK};
pub use random::{gaussian_matrix, random_orthogonal, random_orthogonal_with, seeded_rng, SeededRng};
pub use svd::{cond, svd, Svd};
