//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the fitting pipeline and its building blocks.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value is outside the mathematical domain of an
    /// operation (non-positive variance, empty input, and so on).
    #[error("domain error: {0}")]
    Domain(String),

    /// Structurally invalid input (mismatched lengths, bad column names...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A simplex fit ran out of iterations before meeting its certificate.
    /// Carries the best iterate so callers can inspect or reuse it.
    #[error(
        "solver did not converge within {iterations} iterations \
         (objective {objective:.6e}, kkt gap {kkt_gap:.3e})"
    )]
    NonConvergence {
        iterations: usize,
        objective: f64,
        kkt_gap: f64,
        best: Vec<f64>,
    },

    /// A computation produced values it cannot continue from (a row of
    /// all-impossible observations, a non-finite objective...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
