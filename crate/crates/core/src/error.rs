use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates an operation's precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A line-oriented spec file (game or population) could not be parsed.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A CSV input file is malformed.
    #[error("{path}: line {line}: {message}")]
    Csv {
        path: String,
        line: u64,
        message: String,
    },

    /// A game spec file lacks the payoff entry for a profile.
    #[error("missing payoff line for profile {profile}")]
    MissingPayoff { profile: String },

    /// The discounted sum diverges at delta = 1.
    #[error("discounted payoff diverges at delta = 1; use a finite-horizon simulation instead")]
    Divergent,

    #[error("no temptation: cooperation is an equilibrium for all delta")]
    NoTemptation,

    #[error("cooperation not sustainable: cooperative payoff does not exceed punishment payoff")]
    NotSustainable,

    /// An internal consistency check failed. Indicates a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
