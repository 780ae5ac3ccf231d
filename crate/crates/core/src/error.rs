use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum PlaError {
    /// Invalid configuration value; `path` names the offending field.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    /// A function was called with arguments outside its contract.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A numeric quantity fell outside the mathematical domain of an operation.
    #[error("numeric domain error: {0}")]
    Domain(String),

    /// Fewer observers than the identifiability argument needs.
    #[error("insufficient observers: identifiability requires at least {required} receivers, got {got}")]
    InsufficientObservers { required: usize, got: usize },

    /// Iterative kernel did not converge.
    #[error("no convergence in {0}")]
    Convergence(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PlaError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        PlaError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn arg(message: impl Into<String>) -> Self {
        PlaError::Argument(message.into())
    }

    pub fn domain(message: impl Into<String>) -> Self {
        PlaError::Domain(message.into())
    }

    /// Process exit code used by the CLI: 2 for configuration problems,
    /// 3 for numeric-domain failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            PlaError::Domain(_) | PlaError::Convergence(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, PlaError>;
