//! Special functions and closed-form kernels in four dimensions.
//!
//! The free resolvent kernel is
//! `R₀±(λ²)(r) = ±(i/4)·λ/(2πr)·H₁±(λr)`, whose small-`λr` structure is
//!
//! ```text
//! R₀± = G₀ + g₁±(λ) + λ²G₁ + g₂±(λ)G₂ + λ⁴G₃ + O(λ⁶r⁴ log(λr))
//! ```
//!
//! with `G₀ = 1/(4π²r²)`, `G₁ = −log r/(8π²)`, `G₂ = c₂r²`, `G₃ = c₃r² log r`,
//! `g₁± = λ²(a₁ log λ + z₁±)` and `g₂± = λ⁴(a₂ log λ + z₂±)`.

mod bessel;
mod constants;
mod kernels;

pub use bessel::{
    bessel_all, bessel_j0, bessel_j1, bessel_y0, bessel_y1, bessel_y1_regular, branches, hankel1,
    BesselPair, EULER_GAMMA,
};
pub use constants::{constants_fit, expansion_constants, kernel_mesh_fit, ExpansionConstants, MeshFit};
pub use kernels::{
    ball_mean_log, ball_mean_power, free_resolvent_ball_mean, free_resolvent_jump,
    free_resolvent_jump_ball_mean, free_resolvent_kernel, free_resolvent_regular,
    free_resolvent_regular_ball_mean, g0_kernel, g1_kernel, g2_kernel, g3_kernel, g_scalars, g_scalars_with,
};

use serde::{Deserialize, Serialize};

/// Branch of the limiting-absorption boundary value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// Conjugates `z` on the minus branch; plus-branch values are canonical.
    pub fn apply(self, z: crate::C64) -> crate::C64 {
        match self {
            Sign::Plus => z,
            Sign::Minus => z.conj(),
        }
    }
}
