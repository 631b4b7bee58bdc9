use thiserror::Error;

use crate::spectral::{DomainSpec, ModalState};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("domain mismatch: {left:?} vs {right:?}")]
    DomainMismatch { left: DomainSpec, right: DomainSpec },

    #[error("invalid observation geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Hermitian eigensolver did not converge on a {dim}x{dim} block")]
    EigenSolveFailed { dim: usize },

    /// The truncated Gram form is singular and the target has a component
    /// along its kernel, so no control exists in the truncated space.
    #[error(
        "not observable at truncation: Gram form has a null direction \
         (whitened eigenvalue {min_eigenvalue:e}) that the target excites \
         (relative projection {projection:e})"
    )]
    NotObservableAtTruncation { min_eigenvalue: f64, projection: f64, null_direction: Box<ModalState> },

    #[error("conjugate gradient stopped after {iterations} iterations with relative residual {residual:e}")]
    MaxIterExceeded { iterations: usize, residual: f64 },

    #[error("control horizon {control} does not match simulation horizon {requested}")]
    HorizonMismatch { control: f64, requested: f64 },

    #[error("invalid real number specification: {0}")]
    InvalidReal(String),

    #[error("decimal precision exhausted after {} certified partial quotients", certified.len())]
    PrecisionExhausted { certified: Vec<u64> },
}
