use thiserror::Error;

/// Errors raised by graph construction, exact enumeration and the estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("size limit exceeded: {what} = {value} (limit {limit})")]
    SizeLimit {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("graph is disconnected, diameter is infinite")]
    InfiniteDiameter,

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("event is trivial (always or never occurs), no threshold exists")]
    NoThreshold,

    #[error("event is not increasing: configuration {witness:#b} is in the event but adding edge {edge} leaves it")]
    NotMonotone { witness: u64, edge: usize },

    #[error("invalid instance: {reason} (witness configuration {witness:#b})")]
    InvalidInstance { reason: String, witness: u64 },

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("unsupported graph: {0}")]
    UnsupportedGraph(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
