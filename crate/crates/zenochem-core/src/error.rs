use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left}x{left} vs {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("Hilbert-space dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("nuclear spin must be a half-integer >= 1/2, got {value}")]
    InvalidSpin { value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("integration blew up (non-finite density matrix) at step {step}, t = {time_us} us")]
    IntegrationBlowup { step: usize, time_us: f64 },

    #[error("per-step jump probability pS + pT = {sum:.6} is not < 1; reduce dt")]
    JumpProbabilityOverflow { sum: f64 },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid scenario `{name}`: {reason}")]
    InvalidScenario { name: String, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam { name, reason: reason.into() }
    }
}
