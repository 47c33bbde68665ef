use thiserror::Error;

/// Errors raised by the numerical routines and the model layers built on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid range [{lo}, {hi}]")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("no sign change on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("function has constant sign on all {points} grid points")]
    NoCrossing { points: usize },

    #[error("iteration limit of {max_iter} reached in {routine}")]
    MaxIterations { routine: &'static str, max_iter: usize },

    #[error("quadrature did not converge: error estimate {estimate:e} after {subdivisions} subdivisions")]
    NonConvergence { estimate: f64, subdivisions: usize },

    #[error("non-finite function value {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },

    #[error("point-mass belief has no density")]
    PointMassHasNoDensity,

    #[error("branch has zero probability")]
    EmptyBranch,
}

pub type Result<T> = std::result::Result<T, Error>;
