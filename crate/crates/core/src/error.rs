use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure classes; the CLI maps them onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("missing required key `{0}`")]
    MissingKey(String),

    #[error("unknown key `{key}` on line {line}")]
    UnknownKey { key: String, line: usize },

    #[error("key `{key}`: `{value}` is not a number")]
    NotNumeric { key: String, value: String },

    #[error("key `{key}`: {reason}")]
    Invariant { key: String, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("hypergeometric parameter {0} is a non-positive integer (pole)")]
    PoleArgument(String),

    #[error(
        "series did not converge after {terms} terms (partial sum {partial_re:e}{partial_im:+e}i, last term magnitude {last_term:e})"
    )]
    SeriesNonConvergence {
        terms: usize,
        partial_re: f64,
        partial_im: f64,
        last_term: f64,
    },

    #[error("Kerr coefficient is zero; use the linear transmission instead")]
    ZeroKerr,

    #[error("rectification ratio undefined: both transmissions are zero")]
    UndefinedRatio,

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("basis half-width {n} needs a {dim}x{dim} matrix, above the limit of {limit}")]
    BasisTooLarge { n: usize, dim: usize, limit: usize },

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("frequency grid mismatch: {0}")]
    GridMismatch(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("ill-posed fit: {0}")]
    IllPosed(String),

    #[error("fit did not converge: {0}")]
    NonConvergence(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidArgument(_) => ErrorClass::Usage,
            Error::SeriesNonConvergence { .. }
            | Error::Eigensolver(_)
            | Error::NonConvergence(_) => ErrorClass::Numeric,
            _ => ErrorClass::Data,
        }
    }

    pub(crate) fn invariant(key: &str, reason: impl Into<String>) -> Self {
        Error::Invariant {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}
