use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Inputs outside the domain an operation is defined on.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// The simulator state does not admit the requested operation.
    #[error("state error: {0}")]
    State(String),

    /// A caller broke an operation's contract (e.g. an outcome whose mass does
    /// not match the batch).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A strategy met a block size its invariant rules out.
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// The null space of `A_S - rI` was not one-dimensional.
    #[error("spectral assumption failed: {0}")]
    Spectral(String),

    /// A closed form was evaluated outside the range it holds on.
    #[error("out of range: {0}")]
    OutOfRange(String),
}

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
