use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("instrument column {0} has zero norm")]
    ZeroColumn(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operation requires a nonempty sparsity pattern")]
    EmptyPattern,

    #[error("linear system is numerically singular: {0}")]
    SingularSystem(String),

    #[error("design is degenerate: restricted eigenvalue estimate {0:e} is at machine precision")]
    DegenerateDesign(f64),

    #[error("need at least 5 regressors to place the true signal, got p = {0}")]
    TooFewRegressors(usize),

    #[error("chain recorded no draws")]
    EmptyChain,

    #[error("chain did not record coefficient draws")]
    MissingThetaDraws,

    #[error("regressor {0} has no instrument group and no same-named instrument column")]
    UnmappedRegressor(usize),

    #[error("parse error in {file} at line {line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors caused by malformed or inconsistent input data, as
    /// opposed to failures inside a computation.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::ZeroColumn(_)
                | Error::DimensionMismatch(_)
                | Error::UnmappedRegressor(_)
                | Error::Parse { .. }
                | Error::Io { .. }
                | Error::Csv(_)
                | Error::TooFewRegressors(_)
        )
    }
}
