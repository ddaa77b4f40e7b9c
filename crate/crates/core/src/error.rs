use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes surfaced by the library.
#[derive(Debug)]
pub enum Error {
    /// A parameter or argument violated its documented precondition.
    InvalidParam(String),
    /// A circuit was structurally invalid for the requested operation.
    InvalidCircuit(String),
    /// Parsing of a persisted artifact (circuit text, config, records) failed.
    Parse(String),
    /// Metadata hashes of combined inputs do not agree.
    Provenance(String),
    /// An iterative numerical routine failed to converge.
    NonConvergence(String),
    /// Array shapes of combined inputs do not agree.
    ShapeMismatch(String),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParam(m) => write!(f, "invalid parameter: {m}"),
            Error::InvalidCircuit(m) => write!(f, "invalid circuit: {m}"),
            Error::Parse(m) => write!(f, "parse error: {m}"),
            Error::Provenance(m) => write!(f, "provenance mismatch: {m}"),
            Error::NonConvergence(m) => write!(f, "did not converge: {m}"),
            Error::ShapeMismatch(m) => write!(f, "shape mismatch: {m}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
