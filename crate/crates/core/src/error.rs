use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input data breaks a structural invariant (bad ids, empty ballot, ...).
    #[error("invalid input: {0}")]
    Validation(String),

    /// A rule or experiment was asked for something its configuration
    /// cannot provide, e.g. Borda scoring without rankings.
    #[error("configuration error: {0}")]
    Config(String),

    /// The rule is only defined for a narrower class of instances.
    #[error("unsupported setting: {0}")]
    Unsupported(String),

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// An exhaustive oracle was asked to enumerate beyond its cap.
    #[error("refused: {0}")]
    Refused(String),

    #[error("trial {trial_index} (seed {seed:#018x}) failed: {source}")]
    Trial {
        seed: u64,
        trial_index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Strips any [`Error::Trial`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Trial { source, .. } => source.root(),
            other => other,
        }
    }
}
