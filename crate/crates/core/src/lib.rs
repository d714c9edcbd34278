//! Numerical laboratory for a pseudo-parabolic evolution with a memory
//! nonlinearity: u_t - k Lap(u_t) - Lap(u) = I^gamma(|u|^p) + omega(x).
//!
//! The crate provides fractional-integral quadrature, the cutoff test
//! functions and scaling integrals behind the blow-up estimates, a radial
//! IMEX solver, blow-up detection with blow-up-time extrapolation, and a
//! parameter-sweep driver. The `ppblow` binary exposes all of it.

pub mod blowup;
pub mod cli;
pub mod config;
pub mod error;
pub mod fracint;
pub mod quad;
pub mod solver;
pub mod sweep;
pub mod testfn;

pub use error::{Error, Result};
