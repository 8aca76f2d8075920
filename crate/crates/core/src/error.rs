use thiserror::Error;

/// Errors raised while building a registry.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegistryError {
    #[error("command id {0:?} is already registered")]
    DuplicateId(String),
    #[error("invalid command {id:?}: {reason}")]
    InvalidSpec { id: String, reason: String },
    #[error("threshold {0} is outside [0, 1]")]
    InvalidThreshold(f64),
}

impl RegistryError {
    pub(crate) fn invalid(id: &str, reason: impl Into<String>) -> Self {
        RegistryError::InvalidSpec {
            id: id.to_string(),
            reason: reason.into(),
        }
    }
}

/// A value provider or token mapper failed to produce its values.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct ProviderError(pub String);

impl ProviderError {
    pub fn new(message: impl Into<String>) -> Self {
        ProviderError(message.into())
    }
}

/// Errors raised by [`execute`](crate::engine::execute).
#[derive(Debug, Error)]
pub enum ExecuteError {
    #[error("the sentence did not resolve to a single command")]
    NotResolved,
    #[error("no command with id {0:?}")]
    UnknownCommand(String),
    #[error("handler of {id} failed: {message}")]
    HandlerError { id: String, message: String },
}
