use thiserror::Error;

/// Failures raised by the kernel.
///
/// `Math` covers violated mathematical preconditions (non-units, non-commuting
/// inputs, support defects). `Format` covers malformed literals and files.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0}")]
    Math(String),
    #[error("{0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn math<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Math(msg.into()))
}

pub(crate) fn format<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Format(msg.into()))
}
