use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by data handling, estimation, and inference routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value at grid point {index} (t = {t})")]
    NonFinite { index: usize, t: f64 },

    #[error("no grid point has observed data")]
    EmptyData,

    #[error("estimate is undefined at grid point {index} (t = {t})")]
    Undefined { index: usize, t: f64 },

    #[error("singular influence denominator {value:e} at grid point {index} (t = {t})")]
    SingularDenominator { index: usize, t: f64, value: f64 },

    #[error("root finding failed at grid point {index}: {message}")]
    Solver { index: usize, message: String },

    #[error("covariance matrix is not positive definite after jitter")]
    Cholesky,
}

pub type Result<T> = std::result::Result<T, Error>;
