use thiserror::Error;

use crate::densities::EventKind;
use crate::fisher::Parameter;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge for {quantity}: relative change {relative_change:.3e} after doubling to {nodes} nodes")]
    NumericFailure {
        quantity: String,
        relative_change: f64,
        nodes: usize,
    },

    #[error("parameter {0} is not identifiable: the Fisher information for it vanishes")]
    NonIdentifiable(Parameter),

    #[error("rejection sampling of {kind} events has acceptance rate {acceptance:.3e} (minimum {minimum:.0e})")]
    SamplingFailure {
        kind: EventKind,
        acceptance: f64,
        minimum: f64,
    },

    #[error("density-matrix discretization error: {0}")]
    Discretization(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
