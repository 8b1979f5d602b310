use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Error, Debug)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural problem with user-supplied configuration (grids, specs, counts).
    #[error("configuration error: {0}")]
    Config(String),

    /// A tabulated quantity was requested outside its grid.
    #[error("range error: {0}")]
    Range(String),

    /// A calibration equation has no admissible solution.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// Vector dimensions do not line up.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// An iterative solver failed; carries the best iterate diagnostics.
    #[error("solver error: {message} (residual {residual:.3e} after {iterations} iterations)")]
    Solver {
        message: String,
        residual: f64,
        iterations: usize,
    },

    /// Failure parsing a plain-text record.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
