use thiserror::Error;

/// Errors raised by mesh construction, model evaluation and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("invalid model parameter: {0}")]
    InvalidModel(String),
    #[error("{function} diverges at s = {at}")]
    Divergent { function: &'static str, at: f64 },
    #[error("flux scheme {scheme} does not support {reason}")]
    UnsupportedScheme { scheme: &'static str, reason: String },
    #[error("invalid boundary condition: {0}")]
    InvalidBoundary(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("step {step} failed at cell {cell}: value {value} ({reason})")]
    StepFailure {
        step: usize,
        cell: usize,
        value: f64,
        reason: String,
    },
    #[error("no equilibrium: {0}")]
    NoEquilibrium(String),
    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("singular system: {0}")]
    Singular(String),
    #[error("invalid series: {0}")]
    InvalidSeries(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
