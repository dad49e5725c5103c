//! Reduction rates and diffusion coefficients of the CSL (Continuous
//! Spontaneous Localization) collapse model for rigid bodies.
//!
//! The crate computes, for bodies in a spatial superposition of two rigidly
//! displaced configurations:
//!
//! - the exact discrete (point-nucleon) reduction rate on a cubic lattice,
//!   evaluated by factorized axis sums in O(N) instead of the O(N²) pair sum
//!   ([`lattice::gamma_discrete`]);
//! - closed-form rates for continuous mass distributions — cuboid (exact),
//!   cuboid/cylinder/sphere in the small-displacement limit — plus the
//!   Ghirardi–Pearle–Rimini and Adler literature estimates with their
//!   regime-of-validity flags ([`continuum`]);
//! - Euler–Maclaurin machinery quantifying the error of the continuous
//!   approximation as a function of lattice constant over localization
//!   length ([`euler_maclaurin`]);
//! - diffusion coefficients of the small-displacement master equation,
//!   including exact layered-stack sums, the alternating two-density closed
//!   form with order decomposition, and momentum-space cross-checks
//!   ([`diffusion`]);
//! - deliberately simple brute-force, quadrature and Monte-Carlo oracles
//!   used to validate all fast paths ([`oracles`]).
//!
//! All lengths are in meters, rates in s⁻¹, and every kernel evaluates
//! dimensionless ratios x/r_C before exponentiation, so results are scale
//! invariant under a joint rescaling of all lengths and r_C.

// published minimax coefficients are written out in full; `!(x > 0)`-style
// guards intentionally catch NaN
#![allow(clippy::excessive_precision)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod continuum;
pub mod diffusion;
pub mod domain;
mod error;
pub mod euler_maclaurin;
pub mod lattice;
pub mod oracles;
pub mod specfun;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
