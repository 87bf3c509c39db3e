//! Error type shared by all simulator modules.

use thiserror::Error;

/// Errors surfaced by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An intensity function was queried where it is not defined (`n = 0`, or
    /// outside the range of a tabulated function).
    #[error("intensity function undefined at n = {n}")]
    Domain { n: u32 },

    /// Parameters violate a documented precondition.
    #[error("invalid parameters: {0}")]
    InvalidSpec(String),

    /// A series or solver failed to converge.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// A quantity that must be real carried a significant imaginary part,
    /// which signals an implementation bug rather than a physical regime.
    #[error("expectation value must be real, got {re:e} + {im:e}i")]
    RealityViolation { re: f64, im: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
