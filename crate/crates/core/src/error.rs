use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("coupling must be given either as G or as a cooperativity, not {0}")]
    AmbiguousCoupling(&'static str),

    #[error("pump detuning must be zero (got {0})")]
    UnsupportedDetuning(f64),

    #[error("both local-oscillator tones are zero")]
    ZeroIntensity,

    #[error("spinor has no phase-quadrature weight; a force is invisible to this detector")]
    NoSignal,

    #[error("zero optomechanical coupling; the force is not transduced onto the light")]
    NoTransduction,

    #[error("optimization failed: {0}")]
    OptimizationFailure(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("time step {dt} too large for the drift (|lambda|*dt = {margin:.4})")]
    StepTooLarge { dt: f64, margin: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::OptimizationFailure(_) | Error::NumericalFailure(_) | Error::StepTooLarge { .. }
        )
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
