//! Error types shared across the crate.

/// Errors reported by constructors, solvers, and the verification machinery.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Two vectors (or matrix sides) that must share a dimension do not.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// Input sits on a degenerate configuration the requested operation
    /// cannot handle (e.g. both vectors zero, rank-0 matrix).
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    /// An internal precondition that holds for all real inputs was violated;
    /// signals upstream corruption, not a user error.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// Input rejected at the boundary (non-finite values, bad dimensions,
    /// constraint violations at construction).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Evaluation requested at a pole of the function (lambda == ±1).
    #[error("pole at lambda = {0}")]
    Pole(f64),

    /// The operation does not apply to this value (e.g. KKT residuals of a
    /// result that carries no multiplier).
    #[error("not applicable: {0}")]
    NotApplicable(&'static str),

    /// The sampler exhausted its redraw budget.
    #[error("rng failure: {0}")]
    Rng(&'static str),

    /// Invalid benchmark or run configuration.
    #[error("config error: {0}")]
    Config(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
