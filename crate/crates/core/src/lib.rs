//! Spectral weak observability and HUM (Hilbert Uniqueness Method) control of
//! the wave equation on the unit interval and the unit square.
//!
//! * [`spectral`]: states in the Dirichlet eigenbasis, Sobolev-scale norms,
//!   exact free evolution.
//! * [`observability`]: closed-form time-Gram forms of observed traces and the
//!   observability / admissibility constants they induce.
//! * [`hum`]: minimal-norm controls, exact Duhamel simulation of the
//!   controlled system, cost bounds and the transfer function.
//! * [`diophantine`]: continued fractions and the bounded-quotient set that
//!   governs pointwise observation on the interval.
//! * [`scenario`]: reproducible experiment runner behind the CLI.

pub mod diophantine;
pub mod error;
pub mod hum;
pub mod linalg;
pub mod observability;
pub mod scenario;
pub mod spectral;

pub use error::{Error, Result};
