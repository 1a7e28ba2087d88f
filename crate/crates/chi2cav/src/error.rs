//! Crate-wide error type.

use crate::dynamics::Trajectory;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A physical parameter violated its validity constraints.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation only defined for a restricted regime (e.g. zero
    /// detunings) was called outside it.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// A quantity left the domain of a formula (negative power, N ≤ 1 for
    /// the competition spectrum, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative solve failed. For the integrator this carries the
    /// partial trajectory accumulated before step-size underflow.
    #[error("solver did not converge: {message}")]
    NonConvergence {
        message: String,
        partial: Option<Box<Trajectory>>,
    },

    /// A steady state sat inside the branch dead-band and could not be
    /// classified as trivial or NDOPO.
    #[error("ambiguous branch: |alpha_s*alpha_i| = {pair_magnitude:.3e} is within the dead-band {dead_band:.3e} of zero")]
    AmbiguousBranch { pair_magnitude: f64, dead_band: f64 },

    /// Configuration file problems (missing file, parse error, validation).
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    fn non_convergence(message: impl Into<String>) -> Self {
        Error::NonConvergence {
            message: message.into(),
            partial: None,
        }
    }
}

pub(crate) fn non_convergence(message: impl Into<String>) -> Error {
    Error::non_convergence(message)
}
