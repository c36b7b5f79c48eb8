use thiserror::Error;

/// Errors produced by the ptlab core library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown graph name `{0}`")]
    UnknownGraph(String),

    #[error("unknown class name `{0}`")]
    UnknownClass(String),

    #[error("graph has {actual} vertices, expected {expected}")]
    WrongOrder { expected: usize, actual: usize },

    #[error("graph on {order} vertices is too large for {operation} (limit {limit})")]
    TooLarge {
        operation: &'static str,
        order: usize,
        limit: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("graph is a member of the property; the non-member gap is undefined")]
    IsMember,

    #[error("classes of different orders in one family ({0} and {1})")]
    MixedOrders(usize, usize),

    #[error("unsupported pattern: {0}")]
    UnsupportedPattern(String),
}

pub type Result<T> = std::result::Result<T, Error>;
