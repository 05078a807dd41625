use bilab_core::LabError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExpError {
    #[error(transparent)]
    Lab(#[from] LabError),
    /// A user-supplied profile violates the support conditions of a construction.
    #[error("construction error: {0}")]
    Construction(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("parameter error: {0}")]
    Parameter(String),
}

pub type Result<T> = std::result::Result<T, ExpError>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(ExpError::Parameter(msg.into()))
}
