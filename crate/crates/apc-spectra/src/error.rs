//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by estimation, inference and model construction.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The coherence denominator `Re G(nu,nu) * Re G(omega,omega)` vanished.
    /// Carries the two diagonal values so callers can report them.
    #[error("degenerate coherence denominator: Re G(nu,nu) = {g0_nu}, Re G(omega,omega) = {g0_omega}")]
    DegenerateDenominator { g0_nu: f64, g0_omega: f64 },

    /// Too many subsample blocks had a degenerate coherence denominator.
    #[error("{excluded} of {total} subsample blocks had a degenerate coherence denominator")]
    DegenerateBlocks { excluded: usize, total: usize },

    /// A covariance matrix was indefinite beyond the repair tolerance.
    #[error("covariance matrix is not positive semidefinite (eigenvalue {min_eigenvalue})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Numeric degeneracy of the data, as opposed to a caller mistake.
    /// The grid scan records these points as undetermined instead of failing.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::DegenerateDenominator { .. }
                | Error::DegenerateBlocks { .. }
                | Error::NotPositiveSemidefinite { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
