use thiserror::Error;

pub type Result<T> = std::result::Result<T, QmtError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QmtError {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {what} at lattice index {index}")]
    NonFinite { what: String, index: usize },

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("parameter `{0}` is not bound")]
    UnboundParameter(String),

    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),

    #[error("phase has no analytic derivative with respect to `{0}`")]
    MissingPhaseDerivative(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl QmtError {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        QmtError::Contract(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        QmtError::InvalidArgument(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        QmtError::Numerical(msg.into())
    }
}
