use thiserror::Error;

use crate::units::UnitLabel;

/// Failure modes shared by the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the region where the model is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// An iterative solve did not reach its tolerance.
    #[error("no convergence: {0}")]
    NoConvergence(String),
    /// Adaptive quadrature ran out of subdivisions.
    #[error("quadrature failed to reach tolerance (estimate {estimate:e}, error bound {error:e})")]
    QuadratureFailure { estimate: f64, error: f64 },
    /// The shooting oracle could not bracket the requested level.
    #[error("bracket failure: {0}")]
    BracketFailure(String),
    /// Two quantities expressed in different unit systems were combined.
    #[error("unit systems differ: {0} vs {1}")]
    UnitMismatch(UnitLabel, UnitLabel),
}

pub type Result<T> = std::result::Result<T, Error>;
