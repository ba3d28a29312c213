use thiserror::Error;

use crate::hugoniot::ShockCurve;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("state outside the admissible region: {0}")]
    Domain(String),
    #[error("degenerate eigenstructure or geometry: {0}")]
    Degeneracy(String),
    #[error("no boundary crossing found: {0}")]
    NotFound(String),
    #[error("continuation stalled at s = {reached:.6e}: {reason}")]
    Continuation { reached: f64, reason: String, partial: Option<Box<ShockCurve>> },
    #[error("argument out of range: {0}")]
    Range(String),
    #[error("quadrature failed: {0}")]
    Integration(String),
    #[error("Rankine-Hugoniot residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    InconsistentShock { residual: f64, tol: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("shock curve left the working box at s = {exit:.6e} before the root was bracketed")]
    Truncation { exit: f64 },
    #[error("solver blow-up at t = {time:.6e}: {reason}")]
    BlowUp { time: f64, reason: String },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
