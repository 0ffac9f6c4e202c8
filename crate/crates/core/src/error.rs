use thiserror::Error;

/// Errors raised by model construction and simulation steps.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A named parameter invariant does not hold.
    #[error("constraint `{name}` violated: {detail}")]
    Constraint { name: &'static str, detail: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("infeasible request: {0}")]
    Infeasible(String),

    #[error("invalid lesion request: {0}")]
    Lesion(String),

    #[error("missing pre-morbid statistics")]
    MissingPremorbid,

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn constraint(name: &'static str, detail: impl Into<String>) -> Self {
        Error::Constraint {
            name,
            detail: detail.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
