//! CLI failures and their exit codes.

use std::path::PathBuf;

use qdiode::ErrorClass;
use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Model(#[from] qdiode::Error),

    /// A model error raised while reading a particular file.
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: qdiode::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Table { path: PathBuf, message: String },
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        let class = |e: &qdiode::Error| match e.class() {
            ErrorClass::Usage => EXIT_USAGE,
            ErrorClass::Data => EXIT_DATA,
            ErrorClass::Numeric => EXIT_NUMERIC,
        };
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Model(e) | CliError::File { source: e, .. } => class(e),
            CliError::Io { .. } | CliError::Table { .. } => EXIT_DATA,
        }
    }
}

/// Attaches the offending path to model errors raised while reading it.
pub(crate) fn in_file(path: &std::path::Path) -> impl FnOnce(qdiode::Error) -> CliError + '_ {
    move |source| match source {
        // Already names its path.
        qdiode::Error::Io { .. } => CliError::Model(source),
        source => CliError::File {
            path: path.to_path_buf(),
            source,
        },
    }
}
