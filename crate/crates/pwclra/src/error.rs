//! Error type shared across the library.

use thiserror::Error;

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes surfaced by configuration checks, geometry construction,
/// and the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value (or a combination of values) is inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// An argument to an individual routine is out of its documented domain.
    #[error("argument error: {0}")]
    Argument(String),

    /// Two arrays/points coincide where a nonzero separation is required.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// A matrix factorization or solve failed to converge / is singular.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A metric is undefined for the given input (e.g. zero-energy reference).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// The genie-aided reference method cannot run on this realization.
    #[error("oracle infeasible: {0}")]
    OracleInfeasible(String),

    /// File I/O or parse failure for matrix dumps.
    #[error("matrix i/o error: {0}")]
    MatIo(String),
}
