//! Gauge freedom of neural representation spaces.
//!
//! A hidden representation `h` of a network can be re-expressed as `D h` for
//! any invertible `D`, with the readout compensated by `W D⁻¹`, without
//! changing a single prediction. This crate builds that transformation for a
//! small tanh MLP and measures what it does to coordinate-dependent geometry
//! (cosine similarity, nearest neighbours) versus observables that do not
//! depend on the coordinates (whitened cosine, CKA, SVCCA, pullback metrics).

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x >= 0.0)` also rejects NaN

pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod model;
pub mod neighbors;
pub mod simindex;

#[cfg(feature = "cli")]
pub mod cli;

pub use error::{Error, Result};
pub use linalg::Matrix;
