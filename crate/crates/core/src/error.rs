use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("MalformedXml at byte {position}: {message}")]
    MalformedXml { position: u64, message: String },

    #[error("UnresolvablePrefix: `{0}` has no in-scope namespace declaration")]
    UnresolvablePrefix(String),

    #[error("EmptyLabel: namespace `{0}` yields no alphanumeric label")]
    EmptyLabel(String),

    #[error("EmptyCorpus: no elements to index")]
    EmptyCorpus,

    #[error("ConvergenceFailure: SVD did not converge within {sweeps} sweeps")]
    ConvergenceFailure { sweeps: usize },

    #[error("RankOutOfRange: k = {k} but rank is {rank}")]
    RankOutOfRange { k: usize, rank: usize },

    #[error("UnknownTerm: `{0}` is not in the vocabulary")]
    UnknownTerm(String),

    #[error("DomainError: {0}")]
    Domain(String),

    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),

    #[error("EmptyQueryAfterStopwords: query `{0}` has no searchable terms")]
    EmptyQueryAfterStopwords(String),

    #[error("IndexVersionMismatch: expected {expected}, found {found}")]
    IndexVersionMismatch { expected: String, found: String },

    #[error("IndexFormat at line {line}: {message}")]
    IndexFormat { line: usize, message: String },

    #[error("InvariantViolation: {0}")]
    Invariant(String),

    #[error("{path}: line {line}: {message}")]
    InputFormat { path: String, line: usize, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Errors that indicate a broken internal invariant rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::ConvergenceFailure { .. } | Error::Invariant(_))
    }
}
