//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by construction, validation, and numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument is malformed (wrong shape, out of range).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested quantity is mathematically undefined for this input.
    #[error("domain error: {0}")]
    Domain(String),

    /// A drawn sample contradicts the declared model (e.g. the gradient
    /// bound is violated, which signals a wrong user-supplied bound).
    #[error("model violation: {0}")]
    ModelViolation(String),

    /// The input exceeds a hard size limit of the chosen algorithm.
    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    /// The eigensolver did not reach its tolerance within the sweep cap.
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    /// An internal cross-check failed; indicates a numerical defect, not
    /// a user error.
    #[error("numerical inconsistency: {0}")]
    Numerical(String),

    /// Malformed input text (matrix files, JSON configs).
    #[error("parse error: {0}")]
    Parse(String),

    /// A semantically invalid experiment configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
