//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors produced by rate evaluation, optimization and the sweep harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Decoding-complexity budget that is not a power of two.
    #[error("unsupported decoding complexity {0} (expected 2, 4, 8 or 16)")]
    InvalidComplexity(usize),

    /// Unknown constellation or mode name.
    #[error("unknown constellation name `{0}`")]
    UnknownConstellation(String),

    /// Noise variance must be strictly positive.
    #[error("noise variance must be positive, got {0}")]
    NonPositiveNoise(f64),

    /// Monte-Carlo sample count below the supported minimum.
    #[error("at least {min} Monte-Carlo samples are required, got {got}")]
    TooFewSamples { got: usize, min: usize },

    /// Vector lengths or matrix shapes that do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Invalid numeric parameter.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Precoder violates the power budget.
    #[error("precoder power {power} exceeds budget {budget}")]
    PowerBudget { power: f64, budget: f64 },

    /// Configuration text could not be parsed or validated.
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    /// Channel or report file with malformed content.
    #[error("malformed file: {0}")]
    Format(String),

    /// Wrapped I/O failure (stringified so the error stays `Clone`).
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
