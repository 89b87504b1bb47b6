use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("size cap exceeded: {what} is {actual}, limit {limit} (raise via LIFTGAP_SIZE_CAPS)")]
    SizeCap {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("relaxation unbounded: {0}")]
    Unbounded(String),

    #[error("certification failed for {instance}: {reason}")]
    Certification { instance: String, reason: String },

    #[error("no good restriction after {trials} trials")]
    Exhausted {
        trials: usize,
        best: Box<crate::restriction::RestrictionReport>,
    },

    #[error("internal check failed: {0}")]
    Internal(String),
}

impl Error {
    /// Short machine-readable name, used by the command-line front end.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MalformedInput(_) => "malformed-input",
            Error::SizeCap { .. } => "size-cap",
            Error::Parameter(_) => "parameter",
            Error::Parse { .. } => "parse",
            Error::Hypothesis(_) => "hypothesis",
            Error::Unbounded(_) => "unbounded",
            Error::Certification { .. } => "certification",
            Error::Exhausted { .. } => "exhausted",
            Error::Internal(_) => "internal",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::MalformedInput(e.to_string())
    }
}
