use thiserror::Error;

use crate::consistency::Witness;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure category, stable across releases. The CLI exit code and
/// the C status code are both derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or structurally invalid input.
    Input,
    /// Input is well formed but violates a mathematical precondition
    /// (signaling family, unnormalized measure, negative probability).
    Precondition,
    /// A configured resource limit would be exceeded.
    Resource,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Input => 1,
            ErrorKind::Precondition => 2,
            ErrorKind::Resource => 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("nonsignaling condition violated: {0}")]
    Signaling(Box<Witness>),

    #[error("{what} sums to {sum}, expected 1")]
    NotNormalized { what: String, sum: String },

    #[error("{what} has a negative entry {value}")]
    NegativeProbability { what: String, value: String },

    #[error("marginal family was not extracted from this distribution family")]
    UnverifiedMarginals,

    #[error("joint space needs {atoms} atoms, budget is {budget}")]
    BudgetExceeded { atoms: u128, budget: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidScenario(_) | Error::InvalidInput(_) | Error::Parse(_) | Error::Json(_) | Error::Io(_) => {
                ErrorKind::Input
            }
            Error::Signaling(_)
            | Error::NotNormalized { .. }
            | Error::NegativeProbability { .. }
            | Error::UnverifiedMarginals => ErrorKind::Precondition,
            Error::BudgetExceeded { .. } => ErrorKind::Resource,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind().exit_code()
    }
}
