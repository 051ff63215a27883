use thiserror::Error;

/// Errors for operations with restricted domains. Most arithmetic here is
/// total; these cover precondition violations and I/O in the driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Domain(String),

    #[error("arguments not coprime: gcd({a}, {m}) > 1")]
    NotCoprime { a: u64, m: u64 },

    #[error("invalid parameters (v={v}, k={k}, lambda={lambda}): {reason}")]
    InvalidParams {
        v: u64,
        k: u64,
        lambda: u64,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("soundness violation: {0}")]
    Soundness(String),
}

pub type Result<T> = std::result::Result<T, Error>;
