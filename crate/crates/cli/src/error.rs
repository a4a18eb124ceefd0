use thiserror::Error;
use wva_core::WvaError;
use wva_montecarlo::McError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}, column {column}: {message}")]
    ConfigSyntax { line: usize, column: usize, message: String },

    #[error("config key `{key}`: {message}")]
    ConfigValue { key: &'static str, message: String },

    #[error("cannot read config {path}: {source}")]
    ConfigRead {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] WvaError),

    #[error(transparent)]
    MonteCarlo(#[from] McError),

    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn invalid(key: &'static str, message: impl Into<String>) -> Self {
        CliError::ConfigValue {
            key,
            message: message.into(),
        }
    }

    /// 2 for configuration problems, 3 for numerically degenerate setups, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ConfigSyntax { .. } | CliError::ConfigValue { .. } | CliError::ConfigRead { .. } => 2,
            CliError::Core(WvaError::UnknownStrategy { .. }) => 2,
            CliError::Core(e) if e.is_degeneracy() => 3,
            CliError::MonteCarlo(McError::Core(WvaError::UnknownStrategy { .. })) => 2,
            CliError::MonteCarlo(McError::TooFewReplicas { .. } | McError::InvalidCoupling(_) | McError::InvalidBracket { .. }) => 2,
            CliError::MonteCarlo(e) if e.is_degeneracy() => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
