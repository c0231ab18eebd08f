use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric: max |A - A^T| = {max_asym:e}")]
    NotSymmetric { max_asym: f64 },

    #[error("no convergence after {iterations} sweeps (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eig:e}")]
    NotPsd { min_eig: f64 },

    #[error("invalid argument: {0}")]
    Domain(String),

    #[error("column {column} has (near) zero norm")]
    DegenerateVector { column: usize },

    #[error("degenerate metric: self inner product {value:e} is not positive")]
    DegenerateMetric { value: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("need at least 2 samples, got {n}")]
    SampleCount { n: usize },

    #[error("training diverged at epoch {epoch}")]
    TrainingDiverged { epoch: usize },

    #[error("invariance violated: {0}")]
    InvarianceViolation(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerical core (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. }
                | Error::NotSymmetric { .. }
                | Error::Convergence { .. }
                | Error::NotPsd { .. }
                | Error::DegenerateVector { .. }
                | Error::DegenerateMetric { .. }
                | Error::Degenerate(_)
                | Error::TrainingDiverged { .. }
        )
    }
}
