use thiserror::Error;

/// Crate-wide error type. Variants name the violated invariant so the CLI can
/// surface a precise diagnostic.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("eigensolver failed to converge after {sweeps} sweeps (off-diagonal norm {off:.3e})")]
    EighNonConvergence { sweeps: usize, off: f64 },
    #[error("solver error: {0}")]
    Solver(String),
    #[error("ill-posed problem: {0}")]
    IllPosed(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
