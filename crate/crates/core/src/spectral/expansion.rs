//! Low-energy expansions of `M±(λ)⁻¹` for every classification.
//!
//! With `γ` spanning `ran Γ = ran(S₁ − S₂)` (absent for the first two kinds
//! of data without a resonance direction) and `D₂` the inverse of
//! `S₂vG₁vS₂` on `ran S₂`,
//!
//! ```text
//! M±(λ)⁻¹ = f₁±(λ)·S + D₂/λ² + (g₂±(λ)/λ⁴)·K₁ + K + o(1)
//! ```
//!
//! where `S = ζζᵀ`, `ζ = γ − D₂vG₁vγ` and `f₁±(λ) = 1/(λ²(A log λ + Z±))`.
//! Each classification keeps only the terms that survive: the first kind has
//! no `D₂`, the second no `S`, the regular case reduces to `K = T⁻¹`.

use super::{Classification, SpectralData};
use crate::linalg::{self, CMat, RMat};
use crate::specfun::{self, Sign};
use crate::{Error, Result, C64};
use ndarray::{Array1, Array2, Axis};
use serde::Serialize;

/// Order of the expansion remainder as `λ → 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RemainderOrder {
    /// `O(λ^{2−})`.
    LambdaTwoMinus,
    /// `O(1/|log λ|)`.
    InverseLog,
    /// `O(λ^{0+})`.
    LambdaZeroPlus,
}

/// The singular scalar term `f₁±(λ)·S`.
#[derive(Debug, Clone, Serialize)]
pub struct ResonanceTerm {
    /// Coefficient of `log λ` in `1/(λ²f₁)`.
    pub a: f64,
    /// Constant of `1/(λ²f₁⁺)`; the minus branch uses the conjugate.
    pub z: C64,
    /// `⟨γ, Pγ⟩`.
    pub c1: f64,
    /// `⟨γ, vG₁vγ⟩`.
    pub c2: f64,
    /// `⟨γ, vG₁v D₂ vG₁vγ⟩`.
    pub c3: f64,
    #[serde(skip)]
    pub gamma: Array1<f64>,
    #[serde(skip)]
    pub zeta: Array1<f64>,
    #[serde(skip)]
    pub operator: RMat,
}

impl ResonanceTerm {
    /// `λ²(a log λ + z±)`, the reciprocal of `f₁±`.
    pub fn h(&self, sign: Sign, lambda: f64) -> C64 {
        let z = sign.apply(self.z);
        lambda * lambda * (z + self.a * lambda.ln())
    }

    pub fn f(&self, sign: Sign, lambda: f64) -> C64 {
        1.0 / self.h(sign, lambda)
    }
}

/// The λ-independent data of the expansion.
#[derive(Debug, Clone)]
pub struct InverseExpansion {
    pub kind: Classification,
    pub resonance: Option<ResonanceTerm>,
    pub d2: Option<RMat>,
    /// Coefficient of `g₂±(λ)/λ⁴`.
    pub k1: Option<RMat>,
    /// Bounded part.
    pub k: RMat,
    /// `Γ₁ … Γ₄`, intermediate operators of the construction.
    pub gammas: [RMat; 4],
    /// Limit of `g₂±(λ)/(λ⁴ A log λ)`, weight of the `S Γ₃ D₂` cross terms.
    pub kappa3: f64,
    pub remainder: RemainderOrder,
}

fn outer(a: &Array1<f64>, b: &Array1<f64>) -> RMat {
    a.view().insert_axis(Axis(1)).dot(&b.view().insert_axis(Axis(0)))
}

fn sym(a: RMat) -> RMat {
    let t = a.t().to_owned();
    a + t
}

/// Build the expansion of `M±(λ)⁻¹` for any classification.
pub fn expansion(spectral: &SpectralData) -> Result<InverseExpansion> {
    let n = spectral.len();
    let consts = specfun::expansion_constants();
    let zero = Array2::<f64>::zeros((n, n));
    let d0 = &spectral.d0;
    let p = &spectral.p;
    let s1 = &spectral.s1;
    let g1 = &spectral.vgv.g1;
    let d2 = spectral.d2.clone().unwrap_or_else(|| zero.clone());
    let l1 = spectral.l1_norm();

    let s1pd0 = s1.dot(p).dot(d0);
    let s1g1d0 = s1.dot(g1).dot(d0);
    let gamma1 = -s1pd0.dot(p).dot(s1);
    let gamma2 = -sym(s1pd0.dot(g1).dot(s1));
    let gamma3 = s1.dot(&spectral.vgv.g2).dot(s1);
    let gamma4 = s1.dot(&spectral.vgv.g3).dot(s1) - s1g1d0.dot(g1).dot(s1);

    let resonance = match spectral.gamma_basis.ncols() {
        0 => None,
        1 => {
            let gamma = spectral.gamma_basis.column(0).to_owned();
            let c1 = gamma.dot(&p.dot(&gamma));
            if !(c1.abs() > spectral.tolerance) {
                return Err(Error::Singular(format!("resonance coupling c1 = {c1:.3e}")));
            }
            let g1g = g1.dot(&gamma);
            let c2 = gamma.dot(&g1g);
            let c3 = g1g.dot(&d2.dot(&g1g));
            let zeta = &gamma - &d2.dot(&g1g);
            let a = c1 * l1 * consts.a1;
            let z = consts.z1 * (c1 * l1) + (c2 - c3);
            Some(ResonanceTerm {
                a,
                z,
                c1,
                c2,
                c3,
                operator: outer(&zeta, &zeta),
                gamma,
                zeta,
            })
        }
        r => return Err(Error::GammaRank(r)),
    };

    // Bounded part K = D₀ − D₀vG₁vD₂ − D₂vG₁vD₀ − D₂Γ₄D₂ + resonance terms.
    let mut k = d0.clone();
    let d0g1d2 = d0.dot(g1).dot(&d2);
    k -= &sym(d0g1d2);
    k -= &d2.dot(&gamma4).dot(&d2);
    let mut kappa3 = 0.0;
    if let Some(res) = &resonance {
        let s = &res.operator;
        let c1 = res.c1;
        kappa3 = consts.a2 / res.a;
        k -= &(sym(d0.dot(p).dot(s)) / c1);
        k -= &(s.dot(&gamma1).dot(s) / (c1 * c1));
        k -= &(sym(s.dot(&gamma2).dot(&d2)) / c1);
        k -= &(sym(s.dot(&gamma3).dot(&d2)) * kappa3);
    }

    let (d2_term, k1) = if spectral.d2.is_some() {
        (Some(d2.clone()), Some(-d2.dot(&gamma3).dot(&d2)))
    } else {
        (None, None)
    };
    let remainder = match spectral.classification {
        Classification::Regular => RemainderOrder::LambdaTwoMinus,
        Classification::SecondKind => RemainderOrder::LambdaZeroPlus,
        _ => RemainderOrder::InverseLog,
    };
    Ok(InverseExpansion {
        kind: spectral.classification,
        resonance,
        d2: d2_term,
        k1,
        k,
        gammas: [gamma1, gamma2, gamma3, gamma4],
        kappa3,
        remainder,
    })
}

fn expect(spectral: &SpectralData, kind: Classification) -> Result<InverseExpansion> {
    if spectral.classification != kind {
        return Err(Error::WrongKind {
            expected: kind.name(),
            found: spectral.classification.name(),
        });
    }
    expansion(spectral)
}

pub fn expansion_first_kind(spectral: &SpectralData) -> Result<InverseExpansion> {
    expect(spectral, Classification::FirstKind)
}

pub fn expansion_second_kind(spectral: &SpectralData) -> Result<InverseExpansion> {
    expect(spectral, Classification::SecondKind)
}

pub fn expansion_third_kind(spectral: &SpectralData) -> Result<InverseExpansion> {
    expect(spectral, Classification::ThirdKind)
}

impl InverseExpansion {
    /// `f₁±(λ)`, if the expansion has a resonance term.
    pub fn resonance_scalar(&self, sign: Sign, lambda: f64) -> Option<C64> {
        self.resonance.as_ref().map(|r| r.f(sign, lambda))
    }

    /// `g₂±(λ)/λ⁴`.
    pub fn k1_scalar(sign: Sign, lambda: f64) -> Result<C64> {
        let (_, g2) = specfun::g_scalars(sign, lambda)?;
        Ok(g2 / lambda.powi(4))
    }

    /// Sum of all terms at `λ`.
    pub fn evaluate(&self, sign: Sign, lambda: f64) -> Result<CMat> {
        let mut m = linalg::to_complex(&self.k);
        if let Some(res) = &self.resonance {
            let f = res.f(sign, lambda);
            m.zip_mut_with(&res.operator, |a, &b| *a += f * b);
        }
        if let Some(d2) = &self.d2 {
            let c = 1.0 / (lambda * lambda);
            m.zip_mut_with(d2, |a, &b| *a += C64::new(c * b, 0.0));
        }
        if let Some(k1) = &self.k1 {
            let c = Self::k1_scalar(sign, lambda)?;
            m.zip_mut_with(k1, |a, &b| *a += c * b);
        }
        Ok(m)
    }

    /// `λ`-singular part only: everything but `K`.
    pub fn singular_part(&self, sign: Sign, lambda: f64) -> Result<CMat> {
        let mut m = self.evaluate(sign, lambda)?;
        m.zip_mut_with(&self.k, |a, &b| *a -= b);
        Ok(m)
    }
}
