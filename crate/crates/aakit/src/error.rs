//! Error type shared by the whole crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated an operation's precondition (dimension mismatch,
    /// out-of-range parameter, non-finite input).
    #[error("contract violation: {0}")]
    Contract(String),

    /// An iterative kernel failed to converge or produced non-finite values.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Geometry too degenerate for the requested computation.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// A run configuration that cannot be satisfied by the data
    /// (e.g. more archetypes requested than hull candidates retained).
    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    /// Metric undefined for this input (e.g. zero total variance).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// Malformed text input; `row`/`col` are 1-based file coordinates.
    #[error("parse error at row {row}, column {col}: {message}")]
    Parse {
        row: usize,
        col: usize,
        message: String,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
