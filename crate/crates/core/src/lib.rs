//! Spectral-Galerkin laboratory for the defocusing nonlinear Schrödinger
//! equation `i∂ₜu + Δu = |u|^{2k}u` on the two-torus.
//!
//! The crate evaluates, at fixed Fourier truncation, the objects that enter
//! the quasi-invariance argument for Gaussian initial data:
//!
//! * [`field`] and [`grid`]: finitely supported Fourier fields, multipliers,
//!   projectors and alias-free products.
//! * [`sampler`]: the Gaussian measure `μ_s` and its covariance statistics.
//! * [`flow`]: the truncated flow `Φ_N` in interaction representation.
//! * [`energy`]: the modified energy, its correction `S`, and the exact
//!   decomposition of its time derivative.
//! * [`counting`]: brute-force lattice counting for the resonance sets.
//! * [`transport`]: finite-dimensional transported densities and Monte-Carlo
//!   change-of-variables tests.
//!
//! Integrals over `T²` use the normalized Haar measure, so that
//! `∫|u|² = Σ|û(n)|²`.

pub mod counting;
pub mod energy;
pub mod error;
pub mod field;
pub mod flow;
pub mod grid;
pub mod lattice;
pub mod report;
pub mod sampler;
pub mod stats;
pub mod transport;

pub use error::{Error, Result};
pub use field::{Axis, Multiplier, SpectralField};
pub use lattice::{Dyadic, LatticeIndex};
pub use num_complex::Complex64;
