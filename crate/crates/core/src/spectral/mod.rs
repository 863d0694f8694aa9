//! Zero-energy classification and low-energy inversion of `M±(λ)`.
//!
//! All matrices live in the symmetric basis of [`crate::operator`]. `T` is
//! stored after snapping: the eigencomponents with `|μ| < tol·‖T‖` are
//! removed, so that `T` annihilates `ran S₁` exactly and `M(λ) = T + M₀(λ)`
//! with `M₀` assembled from the regular part of the free resolvent.

mod eigenprojection;
mod expansion;
mod invert;
mod tune;

pub use eigenprojection::{
    far_field_exponent, resonance_function, zero_eigenprojection, ResonanceFunction,
    ZeroEigenprojection,
};
pub use expansion::{
    expansion, expansion_first_kind, expansion_second_kind, expansion_third_kind,
    InverseExpansion, RemainderOrder, ResonanceTerm,
};
pub use invert::{
    feshbach_invert, invert_m_direct, jn_factor, jn_invert, jn_lemma_inverse, BlockInverse,
    DirectInverse, JnFactor,
};
pub use tune::{
    manufacture, third_kind_shape, tune_coupling, tune_third_kind, Manufactured, Target,
    TuneResult,
};

use crate::linalg::{self, RMat, RVec};
use crate::operator::{assemble_p, assemble_t, assemble_vgv, Potential, VgvSet};
use crate::{Error, Result};
use ndarray::{Array1, Array2, Axis};
use serde::Serialize;

pub const DEFAULT_NULL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Classification {
    Regular,
    FirstKind,
    SecondKind,
    ThirdKind,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::Regular => "Regular",
            Classification::FirstKind => "FirstKind",
            Classification::SecondKind => "SecondKind",
            Classification::ThirdKind => "ThirdKind",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of the null-space detection for a symmetric `T`.
#[derive(Debug, Clone)]
pub struct NullSpace {
    pub projection: RMat,
    /// Orthonormal columns spanning the null space.
    pub vectors: RMat,
    pub eigenvalues: Vec<f64>,
    pub norm: f64,
    /// `(min excluded − max included)/‖T‖`.
    pub gap_ratio: f64,
}

/// Flip `x` so its first entry of significant size is positive.
fn sign_normalize(mut x: Array1<f64>) -> Array1<f64> {
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if let Some(first) = x.iter().find(|v| v.abs() > 1e-8 * scale) {
        if *first < 0.0 {
            x.mapv_inplace(|v| -v);
        }
    }
    x
}

/// Orthogonal projection onto the eigenvectors of `T` with `|μ| < tol·‖T‖`.
pub fn null_projection(t: &RMat, tol: f64) -> Result<NullSpace> {
    if !(tol > 0.0) {
        return Err(Error::Domain {
            op: "null_projection",
            detail: format!("tol = {tol}"),
        });
    }
    let n = t.nrows();
    let (w, q) = linalg::eigh(t)?;
    let norm = w.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let mut included: Vec<(f64, Array1<f64>)> = Vec::new();
    let mut excluded_min = f64::INFINITY;
    for (k, &mu) in w.iter().enumerate() {
        if mu.abs() < tol * norm {
            included.push((mu, sign_normalize(q.column(k).to_owned())));
        } else {
            excluded_min = excluded_min.min(mu.abs());
        }
    }
    let included_max = included.iter().fold(0.0_f64, |m, (mu, _)| m.max(mu.abs()));
    let gap_ratio = if norm > 0.0 {
        (excluded_min - included_max) / norm
    } else {
        f64::INFINITY
    };
    if gap_ratio < 10.0 * tol {
        return Err(Error::SpectralGap {
            included: included_max,
            excluded: excluded_min,
            ratio: gap_ratio,
        });
    }
    included.sort_by(|(a, x), (b, y)| {
        a.abs()
            .partial_cmp(&b.abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| {
                x.iter()
                    .zip(y.iter())
                    .map(|(p, q)| p.partial_cmp(q).unwrap_or(std::cmp::Ordering::Equal))
                    .find(|o| *o != std::cmp::Ordering::Equal)
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });
    let r = included.len();
    let mut vectors = Array2::zeros((n, r));
    for (k, (_, v)) in included.iter().enumerate() {
        vectors.column_mut(k).assign(v);
    }
    Ok(NullSpace {
        projection: linalg::projector(&vectors),
        eigenvalues: included.iter().map(|(mu, _)| *mu).collect(),
        vectors,
        norm,
        gap_ratio,
    })
}

/// Basis of `ker(S₁PS₁)` inside `ran S₁`, given an orthonormal basis `Φ` of `ran S₁`.
///
/// Returns the basis of `ran S₂` and, when `S₂ ≠ S₁`, the orthonormal basis
/// of `ran(S₁ − S₂)`.
pub fn compute_s2(phi: &RMat, p: &RMat, tol: f64) -> Result<(RMat, RMat)> {
    let r = phi.ncols();
    let n = phi.nrows();
    if r == 0 {
        return Ok((Array2::zeros((n, 0)), Array2::zeros((n, 0))));
    }
    let c = phi.t().dot(&p.dot(phi));
    let (w, q) = linalg::eigh(&c)?;
    let mut kernel = Vec::new();
    let mut range = Vec::new();
    for (k, &mu) in w.iter().enumerate() {
        let col = sign_normalize(phi.dot(&q.column(k)));
        if mu.abs() < tol {
            kernel.push(col);
        } else {
            range.push(col);
        }
    }
    let stack = |cols: &[Array1<f64>]| {
        let mut m = Array2::zeros((n, cols.len()));
        for (k, c) in cols.iter().enumerate() {
            m.column_mut(k).assign(c);
        }
        m
    };
    Ok((stack(&kernel), stack(&range)))
}

/// Classified zero-energy data of a sampled potential.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub potential: Potential,
    /// `T` as assembled.
    pub t_raw: RMat,
    /// `T` with its null eigencomponents removed.
    pub t: RMat,
    pub p: RMat,
    /// `√w·v`.
    pub u: RVec,
    pub vgv: VgvSet,
    pub s1: RMat,
    pub s2: RMat,
    pub rank_s1: usize,
    pub rank_s2: usize,
    pub null_vectors: RMat,
    pub null_eigenvalues: Vec<f64>,
    pub s2_basis: RMat,
    /// Orthonormal basis of `ran Γ = ran(S₁ − S₂)`.
    pub gamma_basis: RMat,
    pub d0: RMat,
    pub d2: Option<RMat>,
    /// `(Ψᵀ vG₁v Ψ)⁻¹` for the basis `Ψ` of `ran S₂`.
    pub d2_reduced: Option<RMat>,
    pub classification: Classification,
    pub tolerance: f64,
    pub t_norm: f64,
    pub gap_ratio: f64,
}

pub fn classify(potential: &Potential, tol: f64) -> Result<SpectralData> {
    let t_raw = assemble_t(potential)?;
    let n = t_raw.nrows();
    let null = null_projection(&t_raw, tol)?;
    let p = if potential.is_zero() {
        Array2::zeros((n, n))
    } else {
        assemble_p(potential)?
    };
    let u = Array1::from(potential.weighted_v());
    let vgv = assemble_vgv(potential)?;
    let (s2_basis, gamma_basis) = compute_s2(&null.vectors, &p, tol)?;
    let rank_s1 = null.vectors.ncols();
    let rank_s2 = s2_basis.ncols();
    if gamma_basis.ncols() > 1 {
        return Err(Error::GammaRank(gamma_basis.ncols()));
    }
    let classification = match (rank_s1, rank_s2) {
        (0, _) => Classification::Regular,
        (_, 0) => Classification::FirstKind,
        (a, b) if a == b => Classification::SecondKind,
        _ => Classification::ThirdKind,
    };
    let mut t = t_raw.clone();
    for (k, mu) in null.eigenvalues.iter().enumerate() {
        let f = null.vectors.column(k);
        let outer = f.view().insert_axis(Axis(1)).dot(&f.view().insert_axis(Axis(0)));
        t.scaled_add(-mu, &outer);
    }
    let d0 = linalg::inverse(&(&t + &null.projection), "T + S1")?;
    let (d2, d2_reduced) = if rank_s2 > 0 {
        let a2 = s2_basis.t().dot(&vgv.g1.dot(&s2_basis));
        let a2_inv = linalg::inverse(&a2, "S2 vG1v S2")?;
        (Some(s2_basis.dot(&a2_inv).dot(&s2_basis.t())), Some(a2_inv))
    } else {
        (None, None)
    };
    Ok(SpectralData {
        potential: potential.clone(),
        t_raw,
        t,
        s2: linalg::projector(&s2_basis),
        p,
        u,
        vgv,
        s1: null.projection,
        rank_s1,
        rank_s2,
        null_vectors: null.vectors,
        null_eigenvalues: null.eigenvalues,
        s2_basis,
        gamma_basis,
        d0,
        d2,
        d2_reduced,
        classification,
        tolerance: tol,
        t_norm: null.norm,
        gap_ratio: null.gap_ratio,
    })
}

impl SpectralData {
    pub fn len(&self) -> usize {
        self.t.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.t.nrows() == 0
    }

    pub fn l1_norm(&self) -> f64 {
        self.potential.l1_norm
    }

    /// `Γ = S₁ − S₂`.
    pub fn gamma(&self) -> RMat {
        linalg::projector(&self.gamma_basis)
    }
}
