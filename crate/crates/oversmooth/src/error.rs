use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0} vs {1} subintervals")]
    GridMismatch(usize, usize),

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// The geometric parameter ladder hit its cap without bracketing the
    /// discrepancy level. The trace of `(alpha, misfit)` pairs is kept so the
    /// caller can diagnose whether the noise level is below what the grid and
    /// optimizer can resolve.
    #[error("discrepancy ladder exhausted after {} rungs without bracketing", trace.len())]
    LadderExhausted { trace: Vec<(f64, f64)> },

    #[error("degenerate regression: {0}")]
    DegenerateRegression(String),

    #[error("tolerance manifest: {0}")]
    Manifest(String),
}

pub type Result<T> = std::result::Result<T, Error>;
