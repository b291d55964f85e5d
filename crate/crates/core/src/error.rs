//! Error type shared by all simulator modules.

use std::fmt;

/// Errors surfaced by the simulator library.
#[derive(Debug)]
pub enum Error {
    /// A caller-supplied argument violates a precondition.
    InvalidArgument(String),
    /// A placement policy could not find a legal cache for a sub-file copy.
    PlacementInfeasible {
        /// 1-based rank of the content that could not be placed.
        content: u32,
        detail: String,
    },
    /// An internal consistency check failed (a bug, not a usage error).
    Inconsistency(String),
    /// A config file or emitted table could not be parsed.
    Parse(String),
    /// Underlying I/O failure.
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::PlacementInfeasible { content, detail } => {
                write!(f, "placement infeasible for content {content}: {detail}")
            }
            Error::Inconsistency(msg) => write!(f, "internal inconsistency: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Io(err) => write!(f, "io error: {err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err)
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
