//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by sector construction, diagonalization, and the
/// classical integrator.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition (bad diagram, invalid
    /// Cartan vector, inconsistent dimensions, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An exact integer result does not fit the exposed integer width.
    #[error("dimension overflow: {0}")]
    DimensionOverflow(String),

    /// A requested object exceeds the configured memory budget.
    #[error("budget exceeded: {what} requires dimension {dim}, budget is {budget}")]
    BudgetExceeded {
        what: String,
        dim: usize,
        budget: usize,
    },

    /// Numerical failure (eigensolver non-convergence, zero-norm state,
    /// step-size underflow, conservation-monitor breach, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Spectrum too small for the requested statistic.
    #[error("too few levels: have {have}, need {need}")]
    TooFewLevels { have: usize, need: usize },
}
