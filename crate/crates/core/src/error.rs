//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by network evaluation, gadget construction, certification,
/// simulation and the expression language.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument to an operation (dimension mismatch, out-of-range
    /// parameter, non-finite input, ...).
    #[error("input error: {0}")]
    Input(String),

    /// A growth or Lipschitz certificate cannot be produced.
    #[error("certification error: {0}")]
    Certification(String),

    /// A sampled precondition was violated; carries the witnessing point.
    #[error("precondition violated: {msg} (witness x = {witness:?})")]
    Precondition { msg: String, witness: Vec<f64> },

    /// A configurable resource budget (knots, memory) was exceeded.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// An iterative numeric procedure failed to converge.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Expression parse failure with byte offset into the source.
    #[error("parse error at byte {offset}: {msg}")]
    Parse { offset: usize, msg: String },

    /// Expression evaluation hit a domain violation (log/sqrt/pow of an
    /// argument outside the real domain).
    #[error("domain error in `{context}`: {msg}")]
    Domain { context: String, msg: String },

    /// Network (de)serialization failure.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
