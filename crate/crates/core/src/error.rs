use alloc::string::String;

/// Failure categories shared by every module.
///
/// Statistical problems (too few hits, loose covering) are not errors; they
/// travel as warning strings on the result values.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate data: {0}")]
    Degenerate(String),
    #[error("resource limit reached ({what}); complete up to radius {completed_radius}")]
    ResourceLimit { what: String, completed_radius: f64 },
    #[error("net coverage: {0}")]
    Coverage(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

pub(crate) fn degenerate<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Degenerate(msg.into()))
}
