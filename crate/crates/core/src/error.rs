use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the sheath solver and its drivers.
#[derive(Debug, Error)]
pub enum SheathError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("initialization error at node (i={i}, j={j}): {msg}")]
    Init { i: usize, j: usize, msg: String },

    #[error("no admissible wall potential: {0}")]
    NoSolution(String),

    #[error("invalid physical parameters: {0}")]
    Parameter(String),

    #[error("quadrature did not converge on [{lo}, {hi}]: estimated error {err:e}")]
    Quadrature { lo: f64, hi: f64, err: f64 },

    #[error("root finder failed in bracket [{lo}, {hi}] after {iterations} iterations")]
    RootFinder { lo: f64, hi: f64, iterations: usize },

    #[error("nonlinear Poisson solver diverged after {iterations} iterations (residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value in {field} at step {step}, node (i={i}, j={j})")]
    NonFinite { field: &'static str, step: u64, i: usize, j: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, SheathError>;

impl SheathError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SheathError::Io { path: path.into(), source }
    }
}
