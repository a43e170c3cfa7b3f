// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the closed forms hold.
    #[error("domain error: {0}")]
    Domain(String),

    /// A value violates a structural invariant (unitarity, sequence relations, normalization).
    #[error("validation error: {0}")]
    Validation(String),

    /// The requested rescaled duration is at or below the lower bound `T'_0 = π`.
    #[error(
        "infeasible duration: T' = {t_prime} must exceed the lower bound T'_0 = π (≈ 3.14159)"
    )]
    InfeasibleDuration { t_prime: f64 },

    /// The amplitude search exhausted its interval without finding a root.
    #[error("no solution with m = {m} off-pulses for u in [{u_lo}, {u_hi}]: {reason}")]
    NoSolution {
        m: u32,
        u_lo: f64,
        u_hi: f64,
        reason: String,
    },

    /// A numerical procedure (root polish, ODE integration) failed.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
