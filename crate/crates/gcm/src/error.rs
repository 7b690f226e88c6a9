//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by model construction, updating, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// Input dimensions or class indices do not match the model.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A numerical operation failed (non-positive-definite matrix, singular
    /// covariance, ...). Usually signals degenerate or collinear data.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Model hyperparameters violate an invariant required by the requested
    /// operation.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Bad configuration value (cutoff above Nyquist, trim fraction out of
    /// range, malformed scenario, ...).
    #[error("config error: {0}")]
    Config(String),

    /// An operation that requires true labels was given unlabeled data.
    #[error("missing labels: {0}")]
    MissingLabel(String),

    /// A file or string could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
    pub(crate) fn invalid_state(msg: impl Into<String>) -> Self {
        Error::InvalidState(msg.into())
    }
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
    pub(crate) fn missing_label(msg: impl Into<String>) -> Self {
        Error::MissingLabel(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
