use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("element {element} does not belong to a group of kind {kind}")]
    KindMismatch { kind: String, element: String },

    #[error("resource cap exceeded: {what} (limit {limit})")]
    ResourceCap { what: String, limit: usize },

    #[error("precondition failed: {condition}{}", witness.as_ref().map(|w| format!(" (witness: {w})")).unwrap_or_default())]
    Precondition {
        condition: String,
        witness: Option<String>,
    },

    #[error("invalid group table: {0}")]
    InvalidTable(String),

    #[error("no extension configured for this group")]
    NoExtension,

    #[error("incomplete Toeplitz stages: position {0} is unassigned")]
    IncompleteStages(i64),

    #[error("word error: {0}")]
    Word(String),

    #[error("invalid rational {0:?}: expected \"p/q\" with q > 0")]
    BadRational(String),

    #[error("config error at {pointer}: {message}")]
    Config { pointer: String, message: String },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn precondition(condition: impl Into<String>) -> Self {
        Error::Precondition {
            condition: condition.into(),
            witness: None,
        }
    }

    pub fn precondition_with(condition: impl Into<String>, witness: impl Into<String>) -> Self {
        Error::Precondition {
            condition: condition.into(),
            witness: Some(witness.into()),
        }
    }

    pub fn config(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
