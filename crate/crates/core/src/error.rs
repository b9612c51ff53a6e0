use thiserror::Error;

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Error)]
pub enum SimError {
    /// A configuration key is missing, malformed or out of range.
    #[error("configuration error at `{key}`: {message}")]
    Config { key: String, message: String },

    /// Layout generation could not satisfy its placement constraints.
    #[error("layout generation failed: {0}")]
    Layout(String),

    /// A simulation invariant was violated at run time.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl SimError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        SimError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn invariant(message: impl Into<String>) -> Self {
        SimError::Invariant(message.into())
    }

    /// Process exit code for this error: 1 for configuration problems, 2 for
    /// invariant violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Invariant(_) => 2,
            _ => 1,
        }
    }
}
