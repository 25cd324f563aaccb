use thiserror::Error;

/// Errors raised by the estimation engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TapeError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The observed outcome has zero (or negative) probability under the model.
    #[error("outcome impossible under the measurement model (posterior probability {0:e})")]
    ImpossibleOutcome(f64),

    #[error("estimate undefined: first Fourier coefficient vanishes")]
    EstimateUndefined,

    #[error("infinite Holevo variance: first Fourier coefficient vanishes")]
    InfiniteVariance,

    #[error("density is invalid: {0}")]
    InvalidDensity(String),

    #[error("numerical domain error: {0}")]
    NumericalDomain(String),

    #[error("coefficient count {needed} exceeds cap {cap}")]
    CoefficientCap { needed: usize, cap: usize },

    #[error("budget exhausted: remaining time {remaining} admits no candidate")]
    BudgetExhausted { remaining: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quantum state invariant violated: {0}")]
    InvalidState(String),

    #[error("uncertainty undefined: mean sharpness {0} is not positive")]
    UncertaintyUndefined(f64),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl TapeError {
    /// Short machine-readable tag, used by the CLI error output.
    pub fn kind(&self) -> &'static str {
        match self {
            TapeError::InvalidArgument(_) => "invalid_argument",
            TapeError::ImpossibleOutcome(_) => "impossible_outcome",
            TapeError::EstimateUndefined => "estimate_undefined",
            TapeError::InfiniteVariance => "infinite_variance",
            TapeError::InvalidDensity(_) => "invalid_density",
            TapeError::NumericalDomain(_) => "numerical_domain",
            TapeError::CoefficientCap { .. } => "coefficient_cap",
            TapeError::BudgetExhausted { .. } => "budget_exhausted",
            TapeError::Precondition(_) => "precondition",
            TapeError::InvalidState(_) => "invalid_state",
            TapeError::UncertaintyUndefined(_) => "uncertainty_undefined",
            TapeError::Fit(_) => "fit",
            TapeError::Config(_) => "config",
            TapeError::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for TapeError {
    fn from(e: std::io::Error) -> Self {
        TapeError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for TapeError {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            return TapeError::Io(e.to_string());
        }
        TapeError::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, TapeError>;
