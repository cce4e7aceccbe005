use std::fmt;

#[derive(Debug)]
pub enum LabError {
    /// Bad command line, unknown experiment or invalid config.
    Usage(String),
    Io(std::io::Error),
    /// Malformed config or results file.
    Parse(String),
    Core(scc_core::Error),
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabError::Usage(m) => write!(f, "usage error: {m}"),
            LabError::Io(e) => write!(f, "i/o error: {e}"),
            LabError::Parse(m) => write!(f, "parse error: {m}"),
            LabError::Core(e) => write!(f, "computation failed: {e}"),
        }
    }
}

impl std::error::Error for LabError {}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e)
    }
}

impl From<scc_core::Error> for LabError {
    fn from(e: scc_core::Error) -> Self {
        LabError::Core(e)
    }
}

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T, LabError> {
    Err(LabError::Usage(msg.into()))
}
