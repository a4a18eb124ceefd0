use thiserror::Error;

/// Errors raised by the kernels, Fisher metrics and series code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum WvaError {
    #[error("state is not normalized: norm² = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("state dimension {dim} is too small (need at least 2)")]
    DimensionTooSmall { dim: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid meter parameter: {0}")]
    InvalidMeter(String),

    #[error("the optimal post-selection is undefined: A|ψ_i⟩ is the null vector")]
    NullPostSelection,

    #[error("states are not orthogonal: |⟨b|a⟩| = {overlap:e}")]
    NotOrthogonal { overlap: f64 },

    #[error("post-selection impossible: p_f = {p_f:e}")]
    PostSelectionImpossible { p_f: f64 },

    #[error("singular information: outcome {index} has P = {probability:e} but dP/dg = {derivative:e}")]
    SingularInformation {
        index: usize,
        probability: f64,
        derivative: f64,
    },

    #[error("binomial statistics degenerate: p_f = {p_f:e}, dp_f/dg = {derivative:e}")]
    BinomialDegenerate { p_f: f64, derivative: f64 },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("state normalization drifted by {drift:e} in a parametrized family")]
    NormalizationDrift { drift: f64 },

    #[error("unknown {kind} `{name}`; available: {available}")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("{0}")]
    Unsupported(String),
}

impl WvaError {
    /// True for failures caused by a numerically degenerate configuration
    /// rather than malformed input.
    pub fn is_degeneracy(&self) -> bool {
        matches!(
            self,
            WvaError::PostSelectionImpossible { .. }
                | WvaError::SingularInformation { .. }
                | WvaError::BinomialDegenerate { .. }
                | WvaError::NullPostSelection
                | WvaError::NormalizationDrift { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, WvaError>;
