use thiserror::Error;

/// Errors raised by the library.
///
/// The variants line up with the CLI exit codes: configuration and domain
/// problems are caller mistakes, numerical failures come from the solvers,
/// and near-defective resonances are refused rather than reported with
/// meaningless values.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid sizes, divisibility violations, mismatched dimensions.
    #[error("configuration error: {0}")]
    Config(String),

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Solver non-convergence or non-finite results.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Right/left overlap too small to normalize a resonance projector.
    #[error("near-defective resonance: {0}")]
    NearDefective(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
