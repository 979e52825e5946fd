//! kil — a kernel interpolation laboratory.
//!
//! Building blocks for studying kernel-based approximation with finitely
//! smooth kernels: dyadic grid geometry, Sobolev kernel families, minimum-norm
//! interpolation, a discretized spectral model of the kernel integral operator
//! with power-space norms, grid-offset density constructions, and
//! convergence-rate studies with regime classification.

pub mod cli;
pub mod density;
pub mod error;
pub mod geometry;
pub mod interpolate;
pub mod kernels;
pub mod rates;
pub mod sampling;
pub mod spectral;

pub use error::{Error, Result};
