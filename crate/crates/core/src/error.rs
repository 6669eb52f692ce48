//! Error type shared by every module in the crate.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the physics engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation
    /// (negative probability, attenuation below zero, non-symmetric matrix).
    #[error("domain error: {0}")]
    Domain(String),

    /// A set of parameters is individually valid but jointly unusable,
    /// such as decoy intensity levels violating the feasibility rules.
    #[error("infeasible configuration: {0}")]
    InfeasibleConfig(String),

    /// An estimator produced a bound that carries no information, for
    /// example a zero lower bound on a yield that then divides an error
    /// estimate.
    #[error("vacuous bound: {0}")]
    BoundVacuous(String),

    /// A rate or ratio is undefined because its denominator vanished.
    #[error("undefined rate: {0}")]
    UndefinedRate(String),

    /// An internal consistency check failed, such as the eigensolver not
    /// converging within its sweep budget.
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

impl Error {
    /// True for errors caused by user-supplied values rather than by the
    /// numerics of a computation.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::InfeasibleConfig(_))
    }
}
