//! Error taxonomy shared by every module.
//!
//! Errors split into two families, mirrored by the CLI exit codes:
//! *validation* errors (bad inputs, degenerate configurations — exit code 2)
//! and *numerical* errors (a computation that started from valid inputs but
//! broke down — exit code 3).

use thiserror::Error;

/// Convenient result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// A grid construction produced no points (no lattice cube fits the region).
    #[error("empty grid: no cube of side {side} fits inside region {region}")]
    EmptyGrid { region: String, side: f64 },

    /// An operation needs more points than the set provides.
    #[error("too few points: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    /// A point set contains coordinate-identical points.
    #[error("duplicate centers: points {i} and {j} coincide")]
    DuplicateCenters { i: usize, j: usize },

    /// Malformed descriptor, parameter out of range, inconsistent sizes, …
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A rate fit has some usable samples but not enough for a regression.
    #[error("insufficient data: {usable} usable samples of {total}, need at least 3")]
    InsufficientData { usable: usize, total: usize },

    /// A power-space quantity was requested below its well-definedness threshold.
    #[error("power exponent {theta} is at or below the well-definedness threshold {threshold}")]
    BelowPowerThreshold { theta: f64, threshold: f64 },

    /// An operation that needs a nonzero function received the zero function.
    #[error("zero field: the supplied function vanishes identically")]
    ZeroField,

    /// Underlying I/O failure (config files, CSV/JSON outputs, cache files).
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Cholesky factorization broke down on a numerically non-positive-definite system.
    #[error("ill-conditioned system: Cholesky factorization failed{}; consider a ridge > 0", detail)]
    IllConditioned { detail: String },

    /// Generic numerical breakdown (non-finite matrix entries, failed eigensolve, …).
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// A field evaluated to a non-finite value at a quadrature or probe point.
    #[error("evaluation failure: non-finite value {value} at point {point:?}")]
    EvaluationFailure { point: Vec<f64>, value: f64 },

    /// A discretized operator that must be positive produced significant negative eigenvalues.
    #[error("operator not positive: eigenvalue {eigenvalue} below tolerance {tolerance}")]
    NotPositive { eigenvalue: f64, tolerance: f64 },
}

impl Error {
    /// Process exit code for the CLI: 2 for validation errors, 3 for numerical ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::EmptyGrid { .. }
            | Error::TooFewPoints { .. }
            | Error::DuplicateCenters { .. }
            | Error::InvalidInput(_)
            | Error::InsufficientData { .. }
            | Error::BelowPowerThreshold { .. }
            | Error::ZeroField
            | Error::Io(_) => 2,
            Error::IllConditioned { .. }
            | Error::NumericalFailure(_)
            | Error::EvaluationFailure { .. }
            | Error::NotPositive { .. } => 3,
        }
    }

    /// True for the input-validation family (exit code 2).
    pub fn is_validation(&self) -> bool {
        self.exit_code() == 2
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidInput(format!("json: {e}"))
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
