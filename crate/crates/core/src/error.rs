//! Error type shared by all modules.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes of the geometry kernel, samplers, and estimators.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Malformed input: non-finite coordinates, empty point sets, bad weights.
    InvalidInput(String),
    /// Dimension of an argument does not match the ambient dimension.
    DimMismatch { expected: usize, got: usize },
    /// Parameter outside its admissible range.
    Parameter(String),
    /// Iterative solver hit its iteration cap; carries the best distance seen.
    Convergence { iterations: usize, best: f64 },
    /// Caratheodory elimination could not find a usable pivot.
    Reduction(String),
    /// A combinatorial or sampling budget was exceeded.
    Budget(String),
    /// Covariance is numerically singular; carries a null direction.
    RankDeficient { direction: Vec<f64> },
    /// A user-supplied oracle returned a non-finite value.
    InvalidOracle(String),
    /// The operation needs an analytic handle this spec does not provide.
    UnsupportedSpec(String),
    /// A bound report ended up with no computable entry.
    EmptyReport,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::DimMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::Parameter(msg) => write!(f, "parameter out of range: {msg}"),
            Error::Convergence { iterations, best } => {
                write!(f, "no convergence after {iterations} iterations (best distance {best})")
            }
            Error::Reduction(msg) => write!(f, "reduction failed: {msg}"),
            Error::Budget(msg) => write!(f, "budget exceeded: {msg}"),
            Error::RankDeficient { .. } => write!(f, "covariance is numerically singular"),
            Error::InvalidOracle(msg) => write!(f, "invalid oracle: {msg}"),
            Error::UnsupportedSpec(msg) => write!(f, "unsupported spec: {msg}"),
            Error::EmptyReport => write!(f, "no entry of the report was computable"),
        }
    }
}

impl core::error::Error for Error {}
