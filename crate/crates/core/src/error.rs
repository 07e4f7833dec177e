use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no irreducible polynomial of degree {degree} found within {attempts} attempts")]
    NoIrreducible { degree: usize, attempts: usize },

    #[error("modulus is not irreducible: {0}")]
    NotIrreducible(&'static str),

    #[error("inversion of zero")]
    ZeroInverse,

    #[error("matrix is singular")]
    Singular,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("operands come from different field towers")]
    TowerMismatch,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("resampling cap of {0} iterations exceeded")]
    CapExceeded(usize),

    #[error("decoded error part has support outside the information-set complement (row {row}, column {col})")]
    SupportViolation { row: usize, col: usize },

    #[error("recovered file {index} does not match the reference database")]
    RecoveryMismatch { index: usize },

    #[error("subset enumeration of {count} candidates exceeds the cap of {cap}")]
    EnumerationCap { count: u128, cap: u128 },

    #[error("malformed encoding: {0}")]
    Format(String),

    #[error("truncated input: needed {needed} bytes, have {have}")]
    Truncated { needed: usize, have: usize },

    #[error("unknown message type 0x{0:02x}")]
    UnknownMessage(u8),

    #[error("frame of {size} bytes exceeds the {cap}-byte cap")]
    FrameTooLarge { size: usize, cap: usize },

    #[error("server replied with error: {0}")]
    Remote(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn dim_err(msg: impl Into<String>) -> Error {
    Error::Dimension(msg.into())
}
