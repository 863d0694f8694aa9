//! Resonance functions `g = −G₀vf` and the projection onto the zero eigenspace.

use super::SpectralData;
use crate::linalg::{self, RMat};
use crate::operator::{assemble_kernel, dist, G0Kernel};
use crate::{Error, Result};
use ndarray::Array1;
use std::f64::consts::PI;

fn g0(r: f64) -> f64 {
    1.0 / (4.0 * PI * PI * r * r)
}

/// Samples of `g = −G₀vf` for a null vector `f`.
#[derive(Debug, Clone)]
pub struct ResonanceFunction {
    /// Values at the support nodes.
    pub nodal: Vec<f64>,
    /// Values at the requested evaluation points.
    pub values: Vec<f64>,
    /// `max |(I + G₀V)g| / max |g|` over nodes and evaluation points.
    pub residual: f64,
    /// `∫ v f`.
    pub charge: f64,
}

/// `x ↦ −∫ G₀(x − y) v(y) f(y) dy` for off-grid `x`, from the symmetric-basis `f`.
fn far_potential(spectral: &SpectralData, vf: &[f64], x: &[f64; 4]) -> f64 {
    spectral
        .potential
        .grid
        .nodes
        .iter()
        .zip(vf)
        .map(|(y, q)| -g0(dist(x, y)) * q)
        .sum()
}

/// `√w·v·f`: the charge `vf` with its quadrature weight.
fn weighted_charge(spectral: &SpectralData, f: &Array1<f64>) -> Vec<f64> {
    spectral.u.iter().zip(f.iter()).map(|(u, x)| u * x).collect()
}

pub fn resonance_function(
    spectral: &SpectralData,
    f: &Array1<f64>,
    points: &[[f64; 4]],
) -> Result<ResonanceFunction> {
    let n = spectral.len();
    if f.len() != n {
        return Err(Error::Domain {
            op: "resonance_function",
            detail: format!("vector of length {} for {n} nodes", f.len()),
        });
    }
    let off = (&spectral.s1.dot(f) - f).mapv(f64::abs).sum();
    if off > 1e-8 * f.mapv(f64::abs).sum() {
        return Err(Error::Domain {
            op: "resonance_function",
            detail: "vector not in the range of S1".into(),
        });
    }
    let grid = &spectral.potential.grid;
    let sw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    let a = assemble_kernel(&G0Kernel, grid)?;
    let v = &spectral.potential.v;
    let vf = Array1::from_shape_fn(n, |i| v[i] * f[i]);
    let nodal: Vec<f64> = a.dot(&vf).iter().zip(&sw).map(|(x, s)| -x / s).collect();
    let charge_weighted = weighted_charge(spectral, f);
    let values: Vec<f64> = points
        .iter()
        .map(|x| far_potential(spectral, &charge_weighted, x))
        .collect();

    // (I + G₀V)g with V = U v².
    let vg: Vec<f64> = (0..n)
        .map(|i| spectral.potential.samples[i] * nodal[i] * grid.weights[i])
        .collect();
    let vg_sym = Array1::from_shape_fn(n, |i| vg[i] / sw[i]);
    let on_nodes = a.dot(&vg_sym);
    let mut worst = 0.0_f64;
    for i in 0..n {
        worst = worst.max((nodal[i] + on_nodes[i] / sw[i]).abs());
    }
    for (x, gx) in points.iter().zip(&values) {
        let conv: f64 = grid
            .nodes
            .iter()
            .zip(&vg)
            .map(|(y, q)| g0(dist(x, y)) * q)
            .sum();
        worst = worst.max((gx + conv).abs());
    }
    let scale = nodal
        .iter()
        .chain(&values)
        .fold(0.0_f64, |m, x| m.max(x.abs()));
    Ok(ResonanceFunction {
        nodal,
        values,
        residual: if scale > 0.0 { worst / scale } else { 0.0 },
        charge: charge_weighted.iter().sum(),
    })
}

/// Decay exponent `p` in `|g(r·e)| ~ r^{−p}` along a ray, by log-log least squares.
pub fn far_field_exponent(
    spectral: &SpectralData,
    f: &Array1<f64>,
    direction: [f64; 4],
    radii: (f64, f64),
    samples: usize,
) -> Result<f64> {
    if samples < 2 || !(radii.0 > 0.0 && radii.1 > radii.0) {
        return Err(Error::Domain {
            op: "far_field_exponent",
            detail: format!("radii {radii:?}, {samples} samples"),
        });
    }
    let len = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    let charge = weighted_charge(spectral, f);
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..samples {
        let r = radii.0 * (radii.1 / radii.0).powf(k as f64 / (samples - 1) as f64);
        let x = direction.map(|d| r * d / len);
        let g = far_potential(spectral, &charge, &x).abs();
        let (lx, ly) = (r.ln(), g.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let m = samples as f64;
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    Ok(-slope)
}

/// Projection onto the zero eigenspace, `Q = G₀vS₂ D₂ S₂vG₀`, written in the
/// basis `ψⱼ = −G₀vφⱼ` of its range.
///
/// On charges with `∫ vφ = 0`, `G₀G₀ = G₁`, so the Gram matrix of the `ψⱼ`
/// is `Ψᵀ vG₁v Ψ`; `Q` acts on span{ψⱼ} through the coefficient matrix
/// `(ΨᵀvG₁vΨ)⁻¹` applied to inner products with the `ψⱼ`.
#[derive(Debug, Clone)]
pub struct ZeroEigenprojection {
    /// `φⱼ`, orthonormal basis of `ran S₂`.
    pub basis: RMat,
    /// `⟨ψⱼ, ψₖ⟩`.
    pub gram: RMat,
    pub coefficients: RMat,
}

pub fn zero_eigenprojection(spectral: &SpectralData) -> Result<ZeroEigenprojection> {
    let coefficients = spectral.d2_reduced.clone().ok_or(Error::WrongKind {
        expected: "nonzero S2",
        found: spectral.classification.name(),
    })?;
    let basis = spectral.s2_basis.clone();
    let gram = basis.t().dot(&spectral.vgv.g1).dot(&basis);
    Ok(ZeroEigenprojection {
        basis,
        gram,
        coefficients,
    })
}

impl ZeroEigenprojection {
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// Matrix of `Q` acting on span{ψⱼ} in the ψ coordinates.
    pub fn span_matrix(&self) -> RMat {
        self.coefficients.dot(&self.gram)
    }

    /// Coordinates of `Qh` in the ψ basis, given the inner products `⟨ψⱼ, h⟩`.
    pub fn apply(&self, inner: &Array1<f64>) -> Array1<f64> {
        self.coefficients.dot(inner)
    }

    /// `‖Q² − Q‖_F` on span{ψⱼ}.
    pub fn idempotency_residual(&self) -> f64 {
        let q = self.span_matrix();
        linalg::frobenius(&(q.dot(&q) - &q))
    }

    /// `‖Qψⱼ − ψⱼ‖` over all `j`, in the ψ coordinates.
    pub fn fixed_point_residual(&self) -> f64 {
        linalg::frobenius(&(self.span_matrix() - linalg::identity(self.rank())))
    }

    /// `ψⱼ(x)` at an arbitrary point.
    pub fn psi(&self, spectral: &SpectralData, j: usize, x: &[f64; 4]) -> f64 {
        let f = self.basis.column(j).to_owned();
        far_potential(spectral, &weighted_charge(spectral, &f), x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{G1Kernel, Potential, Shape};

    /// Radial charge `ρ(r) = (1 − r²)²(1 − c r²)` on the unit ball.
    fn charge(r: f64, c: f64) -> f64 {
        if r < 1.0 {
            (1.0 - r * r).powi(2) * (1.0 - c * r * r)
        } else {
            0.0
        }
    }

    #[test]
    fn g0_squared_is_g1_on_mean_zero_charges() {
        // ∫ρ r³dr = 1/24 − c/60 = 0 for c = 5/2.
        let c = 2.5;
        // Radial potential φ = G₀ρ: φ'(r) = −m(r)/r³, m(r) = ∫₀ʳ ρ t³ dt, φ = 0 outside.
        let (x, w) = crate::operator::gauss_legendre(40);
        let m = |r: f64| -> f64 {
            x.iter()
                .zip(&w)
                .map(|(xi, wi)| {
                    let t = 0.5 * r * (xi + 1.0);
                    0.5 * r * wi * charge(t, c) * t.powi(3)
                })
                .sum()
        };
        let phi = |r: f64| -> f64 {
            x.iter()
                .zip(&w)
                .map(|(xi, wi)| {
                    let s = r + 0.5 * (1.0 - r) * (xi + 1.0);
                    0.5 * (1.0 - r) * wi * m(s) / s.powi(3)
                })
                .sum()
        };
        let norm_sq: f64 = x
            .iter()
            .zip(&w)
            .map(|(xi, wi)| {
                let r = 0.5 * (xi + 1.0);
                0.5 * wi * 2.0 * PI * PI * phi(r).powi(2) * r.powi(3)
            })
            .sum();
        // ⟨ρ, G₁ρ⟩ with the grid quadrature; the error must shrink under refinement.
        let mut errors = Vec::new();
        for n in [8, 10, 11] {
            let p = Potential::on_box(Shape::reference_bump(), 1.0, n).unwrap();
            let a = crate::operator::assemble_kernel(&G1Kernel, &p.grid).unwrap();
            let q = Array1::from_shape_fn(p.len(), |i| {
                let r = p.grid.nodes[i].iter().map(|a| a * a).sum::<f64>().sqrt();
                charge(r, c) * p.grid.weights[i].sqrt()
            });
            errors.push((q.dot(&a.dot(&q)) / norm_sq - 1.0).abs());
        }
        assert!(errors.windows(2).all(|e| e[1] < e[0]), "{errors:?}");
        assert!(errors[2] < 1.5e-2, "{errors:?}");
    }
}
