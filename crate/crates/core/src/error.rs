//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// `L_0` is a nonzero constant; asking for its roots is the degenerate
    /// case that makes the single number state `|1>` undesignable.
    #[error("no zeros exist: L_0^({alpha}) is the constant 1")]
    NoZeros { alpha: u32 },

    #[error("root index {index} out of range: L_{degree}^({alpha}) has {degree} zeros")]
    RootIndexOutOfRange { degree: u32, alpha: u32, index: usize },

    #[error("invalid {what}: {why}")]
    Invalid { what: &'static str, why: String },

    #[error("truncation {dim} below sideband order {order}: a^{order} vanishes identically")]
    TruncationBelowSideband { dim: usize, order: u32 },

    #[error("diagonal function not finite at Fock level {level}")]
    NonFiniteDiagonal { level: usize },

    #[error(
        "thermal tail beyond truncation too heavy: nbar = {nbar}, N = {dim} leaves \
         weight {tail:.3e} above the top level (limit 1e-8); increase the truncation"
    )]
    ThermalTailTooHeavy { nbar: f64, dim: usize, tail: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "recoil quadrature not converged: doubling the order from {order} changes \
         the average by {delta:.3e} (limit 1e-8); increase quadrature_order"
    )]
    QuadratureNotConverged { order: usize, delta: f64 },

    #[error(
        "superoperator dimension {dim}^2 exceeds the cap {cap}^2; \
         use time evolution instead of the null-space path"
    )]
    SuperoperatorTooLarge { dim: usize, cap: usize },

    #[error(
        "no steady state found at this truncation: smallest singular value \
         {smallest:.3e} is above the threshold {threshold:.3e}"
    )]
    NoSteadyState { smallest: f64, threshold: f64 },

    #[error(
        "empty dark space within truncation (smallest singular value {smallest:.3e}, \
         threshold {threshold:.3e}); possible truncation artifact"
    )]
    EmptyKernel { smallest: f64, threshold: f64 },

    #[error("step size underflow at t = {time:.6e} (dt = {dt:.3e})")]
    StepSizeUnderflow { time: f64, dt: f64 },

    #[error(
        "positivity violation at t = {time:.6e}: minimum eigenvalue {min_eig:.3e} \
         below -1e-6; integration aborted"
    )]
    PositivityViolation { time: f64, min_eig: f64 },

    #[error(
        "snapshot correction {correction:.3e} at t = {time:.6e} exceeds 1e-8; \
         tighten the integration tolerances"
    )]
    AccuracyLoss { time: f64, correction: f64 },

    #[error("adjacent-order solver requires j = m + 1, got j = {j}, m = {m}; use the dark-space basis instead")]
    NonAdjacentOrders { j: u32, m: u32 },

    #[error("undesignable filter: {0}")]
    Undesignable(String),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, why: impl Into<String>) -> Self {
        Error::Invalid { what, why: why.into() }
    }
}
