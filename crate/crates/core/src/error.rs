use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("evaluation at {omega} lies within the guard radius of the pole at {pole}")]
    PoleEvaluation { omega: Complex64, pole: Complex64 },

    #[error("{0}: the dispersion relation is singular at zero frequency for this model")]
    SingularAtZero(&'static str),

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} ({reason})")]
    QuadratureFailure {
        estimate: f64,
        error: f64,
        reason: &'static str,
    },

    #[error("unsupported model for {operation}: {model}")]
    UnsupportedModel {
        operation: &'static str,
        model: &'static str,
    },

    #[error("exp(B^2) overflows for B = {0}; use the asymptotic expansion instead")]
    Overflow(Complex64),

    #[error("signal has not decayed at the grid ends (|end| = {end:e}, peak = {peak:e})")]
    NotDecayed { end: f64, peak: f64 },

    #[error("spectrum is unbounded near zero frequency: |value| = {magnitude:e} exceeds 1/d_omega = {limit:e}")]
    UnboundedSpectrum { magnitude: f64, limit: f64 },

    #[error("extrapolation diverged: {0}")]
    ExtrapolationDiverged(String),

    #[error("kernel does not decay; an explicit integration horizon is required")]
    NonIntegrable,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
