use thiserror::Error;
use wva_core::WvaError;

#[derive(Debug, Error)]
pub enum McError {
    #[error(transparent)]
    Core(#[from] WvaError),

    #[error("dataset is empty (ν = 0)")]
    EmptyDataset,

    #[error("need at least {min} replicas, got {found}")]
    TooFewReplicas { found: usize, min: usize },

    #[error("log-likelihood is not finite at trial {trial} (g = {g})")]
    NonFinite { trial: usize, g: f64 },

    #[error("invalid bracket [{lo}, {hi}]: must satisfy 0 ≤ lo < hi < g_alias = {alias}")]
    InvalidBracket { lo: f64, hi: f64, alias: f64 },

    #[error("invalid coupling g = {0}")]
    InvalidCoupling(f64),

    #[error("outcome index {index} outside the {outcomes} success outcomes")]
    OutcomeOutOfRange { index: usize, outcomes: usize },

    #[error("dataset text, line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dataset does not match the configuration: {0}")]
    Mismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl McError {
    pub fn is_degeneracy(&self) -> bool {
        match self {
            McError::Core(e) => e.is_degeneracy(),
            McError::NonFinite { .. } => true,
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, McError>;
