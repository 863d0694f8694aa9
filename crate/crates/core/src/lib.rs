//! Zero-energy threshold analysis for `H = -Δ + V` on four-dimensional space.
//!
//! The crate discretizes the Birman–Schwinger operator `M(λ) = U + v R₀(λ²) v`
//! on a Gauss–Legendre grid over the support of a compactly supported
//! potential, classifies the obstruction at zero energy, builds the
//! low-energy expansions of `M(λ)⁻¹`, and evaluates the Schrödinger and
//! wave propagator kernels through the Stone formula.
//!
//! Modules, bottom-up:
//! - [`specfun`]: Bessel functions, free resolvent kernel, expansion kernels.
//! - [`operator`]: grids, potentials and dense operator assembly.
//! - [`spectral`]: null spaces, classification, inversion and expansions.
//! - [`propagator`]: Stone-formula kernels, oscillatory quadrature, decay fits.
//! - [`oracle`]: closed-form and radial finite-difference references.
//! - [`cli`]: configuration, subcommands and reports.

pub mod cli;
pub mod error;
pub mod linalg;
pub mod operator;
pub mod oracle;
pub mod propagator;
pub mod specfun;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
