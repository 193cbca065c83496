//! Quantized higher-order approximation of SPH scalar fields along viewing rays.
//!
//! Every particle's contribution to a ray is approximated by an even,
//! continuous, compactly supported piecewise polynomial taken from a
//! distance-indexed look-up table. The pieces are encoded as *knots*
//! carrying localized difference coefficients, so summing arbitrarily many
//! particles along a ray reduces to sorting their knots and running a
//! constant-cost update per knot. Knot positions and coefficients are
//! quantized to integer multiples of a length quantum `τ` and value quantum
//! `ς`, which turns the update into exact integer arithmetic: a particle's
//! knots telescope to the zero polynomial after its last knot, bit for bit.
//!
//! The crate is `no_std` (with `alloc`). File formats, parallel drivers and
//! the command line live in the companion `sphpoly` crate.
//!
//! Module map:
//!
//! * [`kernel`]: SPH kernels as piecewise polynomials, ray sections `B_Λ`,
//!   the constants `κ` and `κ′`.
//! * [`approx`]: candidate basis, Gram–Schmidt, optimal projection for
//!   fixed knots and knot optimization.
//! * [`lut`]: look-up table entries, difference coefficients, `E*`.
//! * [`quantize`]: quantum selection, `Q_D`, integer knot construction.
//! * [`raycast`]: footprints, knot sorting, integer accumulation,
//!   compositing.
#![no_std]
#![deny(unsafe_code)]
#![warn(missing_debug_implementations, rust_2018_idioms)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod approx;
mod error;
pub mod geometry;
pub mod kernel;
pub mod lut;
pub mod optim;
pub mod poly;
pub mod quadrature;
pub mod quantize;
pub mod raycast;
pub mod scalar;

pub use error::{Error, Result};

/// Highest polynomial degree supported for ray approximations.
pub const MAX_DEGREE: usize = 6;

/// Highest number of non-trivial pieces per particle.
pub const MAX_PIECES: usize = 8;
