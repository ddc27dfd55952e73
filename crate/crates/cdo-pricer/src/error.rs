use thiserror::Error;

/// Errors produced by the pricing and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series was truncated at `max_terms` before its tail bound fell
    /// below the requested tolerance.
    #[error("series did not converge within {terms} terms (tail bound {tail:.3e} > tol {tol:.3e})")]
    NonConvergence { terms: usize, tail: f64, tol: f64 },

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature did not converge on [{lo}, {hi}]")]
    Quadrature { lo: f64, hi: f64 },

    /// Division by zero in a ratio quantity (fair spread, gain).
    #[error("division by zero: {0}")]
    DivisionByZero(String),

    /// A regression or fit was requested on a degenerate sample set.
    #[error("degenerate fit input: {0}")]
    DegenerateFit(String),

    /// Invalid run configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
