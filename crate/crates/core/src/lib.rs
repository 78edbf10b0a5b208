//! Solitary waves in one-dimensional peridynamical media.
//!
//! The library constructs traveling-wave profiles of the nonlocal wave
//! equation
//!
//! ```text
//!     u_tt(t, y) = int_0^H [ f(u(y + xi) - u(y), xi) - f(u(y) - u(y - xi), xi) ] dxi
//! ```
//!
//! in the long-wave regime, where the profile is a small-amplitude, broad
//! perturbation governed to leading order by the KdV solitary wave. The
//! pipeline is: constitutive model -> coefficient moments -> spectral
//! operators at wave parameter `eps` -> KdV predictor -> fixed-point
//! corrector -> verified wave, optionally fed into a direct lattice
//! simulation for an independent speed measurement.

pub mod checks;
pub mod config;
pub mod constitutive;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod kdv;
pub mod operators;
pub mod solver;

#[cfg(test)]
pub(crate) mod testutil;

pub use config::RunConfig;
pub use error::{Error, Result};
