use thiserror::Error;

/// Errors raised by parsing, validation and the sparsification pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("n < 4: an instance needs at least four vertices (found {0})")]
    TooFewVertices(usize),

    #[error("self-loop distance undefined (vertex {0})")]
    SelfLoop(usize),

    #[error("vertex {vertex} out of range 1..={n}")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("not a permutation: {0}")]
    NotPermutation(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("contract violation: {0}")]
    Contract(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn contract(message: impl Into<String>) -> Self {
        Error::Contract(message.into())
    }

    /// Errors caused by inconsistent inputs to an otherwise valid call
    /// (as opposed to malformed input text).
    pub fn is_contract_violation(&self) -> bool {
        matches!(
            self,
            Error::Contract(_)
                | Error::SelfLoop(_)
                | Error::VertexOutOfRange { .. }
                | Error::DimensionMismatch { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
