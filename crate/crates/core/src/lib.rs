//! Core algorithms for studying when a random convex polytope captures a
//! target point.
//!
//! For a `d`-dimensional random vector `X` and independent copies
//! `X_1, X_2, ...`, the central quantity is the containment probability
//! `p_n(theta) = P(theta in conv{X_1, ..., X_n})` together with its
//! epsilon-relaxation (the hull passes within distance epsilon of `theta`),
//! the halfspace (Tukey) depth of `theta`, and the threshold sample count
//! `N = inf{n : p_n >= 1/2}`. The crate provides:
//!
//! - [`geom`]: a small convex-geometry kernel (min-norm point over a hull,
//!   membership with certifying weights, Caratheodory reduction of discrete
//!   measures, epsilon-nets of symmetric bodies, whitening),
//! - [`dist`]: sampleable distribution specs with deterministic seeded
//!   streams and exact oracles where closed forms exist,
//! - [`estimate`]: seeded Monte Carlo estimators for containment profiles,
//!   first-hit indices, threshold brackets, and depth,
//! - [`bounds`]: closed-form bound calculators relating all of the above,
//! - [`cubature`]: randomized cubature construction and recombination down
//!   to `d + 1` support points,
//! - [`interior`]: experiments on the deterministic depth level set
//!   contained in the random polytope.
//!
//! Everything here is `no_std` (with `alloc`); IO, file formats, and the
//! command line live in the companion crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod cubature;
pub mod dist;
pub mod error;
pub mod estimate;
pub mod geom;
pub mod interior;
pub mod linalg;
pub mod math;
pub mod rng;

pub use error::{Error, Result};
pub use geom::{MinNormResult, MomentData, PointSet, WeightedMeasure};
pub use rng::RngStream;
