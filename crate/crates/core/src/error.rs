use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("BDF order {0} is outside 1..=6")]
    InvalidOrder(usize),
    #[error("generating function is singular: P(0) = 0")]
    SingularGeneratingFunction,
    #[error("log branch undefined: P(0) = {0} is not positive")]
    LogBranch(f64),
    #[error("parameter {name} = {value} outside its admissible range")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("weight sequence too short: tail bound {bound:e} exceeds {limit:e}")]
    Truncation { bound: f64, limit: f64 },
    #[error("argument z = {0} outside the validated domain |z| <= 2")]
    OutOfDomain(f64),
    #[error("series for E_{alpha}({z}) loses all accuracy to cancellation")]
    Cancellation { alpha: f64, z: f64 },
    #[error("mesh needs at least one interior node and a < b")]
    InvalidMesh,
    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("history holds {have} levels but step {step} needs {need}")]
    MissingHistory { step: usize, have: usize, need: usize },
    #[error("step index must be at least 1 (the initial level is fixed)")]
    InvalidStep,
}
