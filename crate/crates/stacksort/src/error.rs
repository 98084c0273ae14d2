//! Crate-wide error type.

/// Errors produced by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input data violates a precondition (duplicates, out-of-range values,
    /// patterns that are too short, and the like).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An enumeration or search was requested above the configured cap.
    #[error("capacity exceeded: n = {n} is over the cap of {cap}")]
    Capacity { n: u8, cap: u8 },

    /// Text could not be parsed as a permutation, pattern, or machine spec.
    #[error("parse error: {0}")]
    Parse(String),

    /// An orbit ran past its iteration cap. With the default cap this would
    /// contradict the verified quadratic sorting-time bound, so it is never
    /// expected to fire unless the cap was overridden downward.
    #[error(
        "iteration cap {cap} exceeded while sorting {perm} under sc:{sigma}; \
         either the cap was overridden too low or the quadratic bound fails here"
    )]
    BoundViolation { perm: String, sigma: String, cap: u32 },

    /// A checkpoint file failed integrity validation.
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
