use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected} bits, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid CRC code: {0}")]
    InvalidCode(String),

    #[error("non-finite LLR at bit {0}")]
    NonFiniteLlr(usize),

    #[error("{0}")]
    Usage(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("results schema mismatch: missing columns {0:?}")]
    Schema(Vec<String>),

    #[error("no records")]
    NoRecords,

    #[error("need baseline and treatment curves")]
    NeedCurves,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
