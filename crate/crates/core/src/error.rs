use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::genome::ValidationReport;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty genome")]
    Empty,
    #[error("bad gene token `{token}` at byte {offset}: {reason}")]
    BadToken { token: String, offset: usize, reason: String },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("invalid genome: {0}")]
    InvalidGenome(ValidationReport),

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("population is empty")]
    EmptyPopulation,

    #[error("individual {index} has no fitness")]
    Unevaluated { index: usize },

    #[error("evaluator transport failure: {0}")]
    Transport(String),

    #[error("checkpoint version {found} is not supported (expected {expected})")]
    CheckpointVersion { found: u32, expected: u32 },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },

    #[error("malformed {what} `{path}`: {message}")]
    Malformed { what: &'static str, path: PathBuf, message: String },
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { field: field.into(), message: message.into() }
    }

    pub(crate) fn io(context: impl Into<String>, source: io::Error) -> Self {
        Error::Io { context: context.into(), source }
    }

    /// Short machine-readable category, used by the command-line error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::InvalidGenome(_) => "validation",
            Error::Config { .. } => "config",
            Error::EmptyPopulation | Error::Unevaluated { .. } => "population",
            Error::Transport(_) => "transport",
            Error::CheckpointVersion { .. } => "checkpoint_version",
            Error::Io { .. } => "io",
            Error::Malformed { .. } => "malformed",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
