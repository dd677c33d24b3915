use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV in {path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    Parse {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("target class {class:?} not present (available: {available:?})")]
    TargetClassNotFound {
        class: String,
        available: Vec<String>,
    },

    #[error("dataset needs at least two distinct classes, found {found}")]
    TooFewClasses { found: usize },

    #[error("class {class:?} has {members} training members, fewer than the {required} required for stratification")]
    ClassTooSmall {
        class: String,
        members: usize,
        required: usize,
    },

    #[error("feature {feature} has zero variance over the training targets")]
    ZeroVariance { feature: usize },

    #[error("C = {c} is infeasible for N = {n} samples (need C >= 1/N)")]
    InfeasibleC { c: f64, n: usize },

    #[error("Gram matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("SVDD solver exhausted {iterations} iterations (max KKT violation {violation:e})")]
    SolverBudget {
        iterations: usize,
        violation: f64,
        best_alpha: Vec<f64>,
    },

    #[error("projected covariance is degenerate (all eigenvalues zero)")]
    DegenerateCovariance,

    #[error("centered kernel matrix has no positive eigenvalues")]
    DegenerateKernel,

    #[error("projection lost rank at iteration {iteration}")]
    RankLoss { iteration: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("gmean is undefined with {positives} positives and {negatives} negatives")]
    EmptyClass { positives: usize, negatives: usize },

    #[error("every grid configuration was skipped ({} skips recorded)", .skipped.len())]
    AllConfigurationsSkipped { skipped: Vec<String> },

    #[error("repetition {repetition} failed: {source}")]
    Repetition {
        repetition: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("model serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
