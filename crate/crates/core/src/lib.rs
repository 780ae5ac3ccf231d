//! Doppler-fingerprint physical-layer authentication for LEO inter-satellite
//! links.
//!
//! Receiving satellites compare the NPSDS (nominal power spectral density
//! sample) they measure against the value expected from the legitimate
//! transmitter's known kinematics, decide locally with an optimized threshold,
//! and a fusion center combines the decisions.
//!
//! * [`geometry`]: range rates, Doppler shifts, Jacobian and identifiability.
//! * [`signal`]: nominal PSD model and spectral observation generators.
//! * [`detection`]: NPSDS estimation, closed-form error probabilities,
//!   threshold optimization.
//! * [`fusion`]: OR / AND / majority fusion and joint probabilities.
//! * [`harness`]: scenario files, Monte Carlo experiments, sweeps, output.

// `!(x > 0.0)` style checks are used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detection;
pub mod error;
pub mod fusion;
pub mod geometry;
pub mod harness;
pub mod signal;

pub use error::{PlaError, Result};
