use std::io;

/// Errors raised by the simulation library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("unsupported QAM order {0} (expected 4, 16 or 64)")]
    UnsupportedQamOrder(u32),

    #[error("unsupported MLS register length {0} (expected 2..=16)")]
    UnsupportedRegisterLength(u32),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("insufficient samples: need index {needed}, have {available}")]
    InsufficientSamples { needed: usize, available: usize },

    /// No timing-metric crossing was found before the search limit.
    #[error("synchronization failed: no timing-metric crossing in {scanned} candidates")]
    SyncFailure { scanned: usize },

    #[error("linear system is numerically singular")]
    Singular,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
