use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A hypothesis of one of the norm lemmas fails on the supplied truncation.
    /// `index` names the offending coefficient when there is one.
    #[error("hypothesis violated: {hypothesis}{}", index.map(|i| format!(" (coefficient index {i})")).unwrap_or_default())]
    HypothesisViolated {
        hypothesis: String,
        index: Option<usize>,
    },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("bad reduction at p = {prime}: {detail}")]
    BadReduction { prime: u64, detail: String },

    #[error("insufficient degree budget: need {required}, got {given}")]
    InsufficientBudget { required: usize, given: usize },

    /// An interval comparison failed to separate within its precision cap.
    #[error("comparison undecided at {bits} bits: {what}")]
    Undecided { what: String, bits: u32 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn hypothesis(msg: impl Into<String>, index: Option<usize>) -> Self {
        Error::HypothesisViolated {
            hypothesis: msg.into(),
            index,
        }
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::PreconditionViolated(msg.into())
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
