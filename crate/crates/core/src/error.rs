use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {message}")]
    InvalidParameter { field: &'static str, message: String },

    #[error("domain error in {context}: {message}")]
    Domain { context: &'static str, message: String },

    #[error("profile integration failed at xi = {xi}: denominator c + phi_xi^2 - phi^2 = {denominator:e} fell below {floor:e}")]
    IntegrationFailure { xi: f64, denominator: f64, floor: f64 },

    #[error("profile tail did not converge: |phi(L) - k| = {tail_error:e} > {tolerance:e} at L = {half_length}")]
    TailNotConverged { tail_error: f64, tolerance: f64, half_length: f64 },

    #[error("eigen-solver did not converge for eigenvalue #{index}: residual {residual:e} > {tolerance:e}")]
    Solver { index: usize, residual: f64, tolerance: f64 },

    #[error("right-hand side is not even: max |b(x) - b(-x)| = {asymmetry:e}")]
    Parity { asymmetry: f64 },

    #[error("antiderivative stage `{stage}` is ambiguous: integrand mean {mean:e} exceeds {tolerance:e}")]
    Ambiguity { stage: &'static str, mean: f64, tolerance: f64 },

    #[error("non-finite value in the right-hand side at t = {t}")]
    BlowUp { t: f64 },

    #[error("positivity lost at t = {t}: min m = {min_m:e} (field left X_k)")]
    PositivityLoss { t: f64, min_m: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
