use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates one of its documented invariants.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("stationarity system is numerically singular (condition estimate {condition:.3e})")]
    SingularSystem { condition: f64 },

    #[error("edge list line {line}: {reason}")]
    EdgeList { line: usize, reason: String },

    #[error("network is invalid: {0}")]
    InvalidNetwork(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
