use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeylError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("series diverges: s * 2b/(b+2) = {exponent} <= 1")]
    Divergent { exponent: f64 },

    #[error("grid too coarse: {interior} interior nodes, at least {required} required")]
    GridTooCoarse { interior: usize, required: usize },

    #[error("Friedrichs extrapolation is not monotone at a = {a}: {previous} -> {current}")]
    NonMonotone { a: f64, previous: f64, current: f64 },

    #[error("extrapolation did not settle after {steps} steps (last change {last_change})")]
    NotConverged { steps: usize, last_change: f64 },

    #[error("Morse-Bott condition violated at y = {at}: Q = {q}")]
    MorseBottViolation { at: f64, q: f64 },

    #[error("volume weight overflows at x = {x}")]
    WeightOverflow { x: f64 },

    #[error("geodesic integration failed: {0}")]
    Integration(String),
}

pub type Result<T> = std::result::Result<T, WeylError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> WeylError {
    WeylError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
