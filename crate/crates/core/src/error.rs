use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid word {0:?}: expected a string of 0/1 characters")]
    InvalidWord(String),

    #[error("duplicate codeword {0}")]
    DuplicateWord(String),

    #[error("codeword {word} has weight {actual}, expected {expected}")]
    WeightMismatch {
        word: String,
        expected: usize,
        actual: usize,
    },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("linear program for M={m} unresolved: {reason} (bounds {lower} <= 1/tau <= {upper})")]
    Unresolved {
        m: usize,
        reason: String,
        lower: String,
        upper: String,
    },

    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("decode failure: {0}")]
    Decode(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
