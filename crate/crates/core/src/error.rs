use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument outside the domain of a formula (log of zero, negative variance).
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed inputs: bad config fields, non-permutation preference lists,
    /// mismatched dimensions, invalid matchings.
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("instance too large for exhaustive enumeration: {0}")]
    TooLarge(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    /// Gale-Shapley produced a matching with blocking pairs. Never expected.
    #[error("stability assertion failed for trial seed {seed}: {pairs} blocking pair(s)")]
    Unstable { seed: u64, pairs: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Parse {
            path: path.into(),
            source,
        }
    }
}
