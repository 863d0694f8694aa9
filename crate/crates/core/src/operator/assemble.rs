//! Dense operator assembly.
//!
//! Operators are stored in the symmetric basis `A_s = W^{1/2} Â W^{−1/2}`,
//! where `Â` acts on nodal values and `W = diag(w)`. In this basis the
//! weighted inner product becomes the Euclidean one, integral operators with
//! symmetric kernels are symmetric matrices, and weighted adjoints are plain
//! (conjugate) transposes.

use super::grid::QuadratureGrid;
use super::potential::Potential;
use crate::linalg::{CMat, RMat};
use crate::specfun::{self, ExpansionConstants, Sign};
use crate::{Error, Result, C64};
use ndarray::Array2;
use std::f64::consts::PI;

/// Kernels with a radially symmetric profile `k(|x − y|)`.
pub trait RadialKernel {
    type Value: Copy + Default + std::ops::Mul<f64, Output = Self::Value>;

    fn value(&self, r: f64) -> Self::Value;

    /// Mean of the kernel over the 4D ball of radius `rho` centred at 0.
    fn ball_mean(&self, rho: f64) -> Self::Value;

    /// Power `p` of the leading `r^{−p}` singularity.
    fn singularity_order(&self) -> f64 {
        0.0
    }
}

pub struct G0Kernel;
pub struct G1Kernel;
pub struct G2Kernel;
pub struct G3Kernel;
pub struct UnitKernel;

/// `R₀±(λ²)`.
pub struct ResolventKernel {
    pub sign: Sign,
    pub lambda: f64,
}

/// `R₀±(λ²) − G₀`.
pub struct RegularResolventKernel {
    pub sign: Sign,
    pub lambda: f64,
}

/// `R₀⁺(λ²) − R₀⁻(λ²)`.
pub struct JumpKernel {
    pub lambda: f64,
}

impl RadialKernel for G0Kernel {
    type Value = f64;
    fn value(&self, r: f64) -> f64 {
        1.0 / (4.0 * PI * PI * r * r)
    }
    fn ball_mean(&self, rho: f64) -> f64 {
        1.0 / (2.0 * PI * PI * rho * rho)
    }
    fn singularity_order(&self) -> f64 {
        2.0
    }
}

impl RadialKernel for G1Kernel {
    type Value = f64;
    fn value(&self, r: f64) -> f64 {
        -r.ln() / (8.0 * PI * PI)
    }
    fn ball_mean(&self, rho: f64) -> f64 {
        -specfun::ball_mean_log(0, rho) / (8.0 * PI * PI)
    }
}

impl RadialKernel for G2Kernel {
    type Value = f64;
    fn value(&self, r: f64) -> f64 {
        specfun::expansion_constants().c2 * r * r
    }
    fn ball_mean(&self, rho: f64) -> f64 {
        specfun::expansion_constants().c2 * specfun::ball_mean_power(1, rho)
    }
}

impl RadialKernel for G3Kernel {
    type Value = f64;
    fn value(&self, r: f64) -> f64 {
        specfun::expansion_constants().c3 * r * r * r.ln()
    }
    fn ball_mean(&self, rho: f64) -> f64 {
        specfun::expansion_constants().c3 * specfun::ball_mean_log(1, rho)
    }
}

impl RadialKernel for UnitKernel {
    type Value = f64;
    fn value(&self, _: f64) -> f64 {
        1.0
    }
    fn ball_mean(&self, _: f64) -> f64 {
        1.0
    }
}

impl RadialKernel for ResolventKernel {
    type Value = C64;
    fn value(&self, r: f64) -> C64 {
        specfun::free_resolvent_regular(self.sign, self.lambda, r) + 1.0 / (4.0 * PI * PI * r * r)
    }
    fn ball_mean(&self, rho: f64) -> C64 {
        specfun::free_resolvent_ball_mean(self.sign, self.lambda, rho)
    }
    fn singularity_order(&self) -> f64 {
        2.0
    }
}

impl RadialKernel for RegularResolventKernel {
    type Value = C64;
    fn value(&self, r: f64) -> C64 {
        specfun::free_resolvent_regular(self.sign, self.lambda, r)
    }
    fn ball_mean(&self, rho: f64) -> C64 {
        specfun::free_resolvent_regular_ball_mean(self.sign, self.lambda, rho)
    }
}

impl RadialKernel for JumpKernel {
    type Value = C64;
    fn value(&self, r: f64) -> C64 {
        specfun::free_resolvent_jump(self.lambda, r)
    }
    fn ball_mean(&self, rho: f64) -> C64 {
        specfun::free_resolvent_jump_ball_mean(self.lambda, rho)
    }
}

/// Kernels from closures, for experiments and tests.
pub struct FnKernel<F, M> {
    pub value: F,
    pub mean: M,
    pub order: f64,
}

impl<F: Fn(f64) -> f64, M: Fn(f64) -> f64> RadialKernel for FnKernel<F, M> {
    type Value = f64;
    fn value(&self, r: f64) -> f64 {
        (self.value)(r)
    }
    fn ball_mean(&self, rho: f64) -> f64 {
        (self.mean)(rho)
    }
    fn singularity_order(&self) -> f64 {
        self.order
    }
}

/// Symmetric-basis matrix `√wᵢ k(|xᵢ − xⱼ|) √wⱼ`, with the diagonal replaced
/// by `wᵢ` times the ball mean of `k` over the cell's equal-volume ball.
pub fn assemble_kernel<K: RadialKernel>(kernel: &K, grid: &QuadratureGrid) -> Result<Array2<K::Value>> {
    if kernel.singularity_order() > 3.5 {
        return Err(Error::NonIntegrable(kernel.singularity_order()));
    }
    let n = grid.len();
    let sw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    let mut a = Array2::<K::Value>::default((n, n));
    for i in 0..n {
        a[[i, i]] = kernel.ball_mean(grid.cell_radius[i]) * grid.weights[i];
        for j in 0..i {
            let v = kernel.value(grid.distance(i, j)) * (sw[i] * sw[j]);
            a[[i, j]] = v;
            a[[j, i]] = v;
        }
    }
    Ok(a)
}

/// Symmetric basis to the nodal (weighted) representation `W^{−1/2} A W^{1/2}`.
pub fn to_nodal<T>(a: &Array2<T>, grid: &QuadratureGrid) -> Array2<T>
where
    T: Copy + std::ops::Mul<f64, Output = T>,
{
    let sw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    let mut b = a.clone();
    for ((i, j), x) in b.indexed_iter_mut() {
        *x = *x * (sw[j] / sw[i]);
    }
    b
}

fn sandwich<T>(a: &mut Array2<T>, v: &[f64])
where
    T: Copy + std::ops::Mul<f64, Output = T>,
{
    for ((i, j), x) in a.indexed_iter_mut() {
        *x = *x * (v[i] * v[j]);
    }
}

/// `diag(v)·K·diag(v)` for a radial kernel.
pub fn assemble_vkv<K: RadialKernel>(kernel: &K, potential: &Potential) -> Result<Array2<K::Value>> {
    let mut a = assemble_kernel(kernel, &potential.grid)?;
    sandwich(&mut a, &potential.v);
    Ok(a)
}

/// `T = U + vG₀v`.
pub fn assemble_t(potential: &Potential) -> Result<RMat> {
    let mut t = assemble_vkv(&G0Kernel, potential)?;
    for (i, u) in potential.u.iter().enumerate() {
        t[[i, i]] += u;
    }
    Ok(t)
}

/// `P = ‖V‖₁⁻¹ v⟨v, ·⟩`.
pub fn assemble_p(potential: &Potential) -> Result<RMat> {
    if potential.is_zero() {
        return Err(Error::ZeroPotential);
    }
    let u = potential.weighted_v();
    let n = u.len();
    Ok(Array2::from_shape_fn((n, n), |(i, j)| u[i] * u[j] / potential.l1_norm))
}

/// Largest λ the grid resolves.
pub fn lambda_limit(potential: &Potential) -> f64 {
    let g = &potential.grid;
    let by_cell = 1.0 / g.max_cell_radius();
    let by_nyquist = PI * g.nodes_per_dim as f64 / g.diameter();
    by_cell.min(by_nyquist)
}

fn check_lambda(lambda: f64, potential: &Potential) -> Result<()> {
    let limit = lambda_limit(potential);
    if !(lambda > 0.0) || lambda > limit {
        return Err(Error::Unresolved { lambda, limit });
    }
    Ok(())
}

/// `M±(λ) = U + vR₀±(λ²)v`.
pub fn assemble_m(sign: Sign, lambda: f64, potential: &Potential) -> Result<CMat> {
    check_lambda(lambda, potential)?;
    let mut m = assemble_vkv(&ResolventKernel { sign, lambda }, potential)?;
    for (i, u) in potential.u.iter().enumerate() {
        m[[i, i]] += u;
    }
    Ok(m)
}

/// `M₀±(λ) = M±(λ) − T = v(R₀± − G₀)v`, assembled without cancellation.
pub fn assemble_m0(sign: Sign, lambda: f64, potential: &Potential) -> Result<CMat> {
    check_lambda(lambda, potential)?;
    assemble_vkv(&RegularResolventKernel { sign, lambda }, potential)
}

/// `M⁺(λ) − M⁻(λ) = v(R₀⁺ − R₀⁻)v`.
pub fn assemble_m_jump(lambda: f64, potential: &Potential) -> Result<CMat> {
    check_lambda(lambda, potential)?;
    assemble_vkv(&JumpKernel { lambda }, potential)
}

/// `vG₁v`, `vG₂v`, `vG₃v`.
#[derive(Debug, Clone)]
pub struct VgvSet {
    pub g1: RMat,
    pub g2: RMat,
    pub g3: RMat,
}

pub fn assemble_vgv(potential: &Potential) -> Result<VgvSet> {
    Ok(VgvSet {
        g1: assemble_vkv(&G1Kernel, potential)?,
        g2: assemble_vkv(&G2Kernel, potential)?,
        g3: assemble_vkv(&G3Kernel, potential)?,
    })
}

/// `M(λ)` from its expansion through `order` ∈ {0, 1, 2}:
/// `T`, `+ ‖V‖₁g₁P + λ²vG₁v`, `+ g₂vG₂v + λ⁴vG₃v`.
pub fn m_expansion(
    order: usize,
    sign: Sign,
    lambda: f64,
    t: &RMat,
    p: &RMat,
    vgv: &VgvSet,
    l1_norm: f64,
) -> Result<CMat> {
    m_expansion_with(specfun::expansion_constants(), order, sign, lambda, t, p, vgv, l1_norm)
}

/// [`m_expansion`] with explicit expansion constants.
#[allow(clippy::too_many_arguments)]
pub fn m_expansion_with(
    consts: &ExpansionConstants,
    order: usize,
    sign: Sign,
    lambda: f64,
    t: &RMat,
    p: &RMat,
    vgv: &VgvSet,
    l1_norm: f64,
) -> Result<CMat> {
    let mut m = crate::linalg::to_complex(t);
    let (g1, g2) = if order >= 1 {
        specfun::g_scalars_with(consts, sign, lambda)?
    } else {
        (C64::new(0.0, 0.0), C64::new(0.0, 0.0))
    };
    if order >= 1 {
        let l2 = lambda * lambda;
        m.zip_mut_with(p, |a, &b| *a += g1 * (l1_norm * b));
        m.zip_mut_with(&vgv.g1, |a, &b| *a += C64::new(l2 * b, 0.0));
    }
    if order >= 2 {
        let l4 = lambda.powi(4);
        m.zip_mut_with(&vgv.g2, |a, &b| *a += g2 * b);
        m.zip_mut_with(&vgv.g3, |a, &b| *a += C64::new(l4 * b, 0.0));
    }
    Ok(m)
}

/// Remainder `M₀(λ) − (expansion through order − T)`, computed from the regular part.
pub fn m_expansion_remainder(
    order: usize,
    sign: Sign,
    lambda: f64,
    potential: &Potential,
    p: &RMat,
    vgv: &VgvSet,
) -> Result<CMat> {
    m_expansion_remainder_with(specfun::expansion_constants(), order, sign, lambda, potential, p, vgv)
}

/// [`m_expansion_remainder`] with explicit expansion constants.
pub fn m_expansion_remainder_with(
    consts: &ExpansionConstants,
    order: usize,
    sign: Sign,
    lambda: f64,
    potential: &Potential,
    p: &RMat,
    vgv: &VgvSet,
) -> Result<CMat> {
    let zero = Array2::<f64>::zeros(p.raw_dim());
    let partial = m_expansion_with(consts, order, sign, lambda, &zero, p, vgv, potential.l1_norm)?;
    Ok(assemble_m0(sign, lambda, potential)? - partial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, symmetry_residual};
    use crate::operator::{build_grid, Shape};

    fn bump(g: f64, n: usize) -> Potential {
        Potential::on_box(Shape::reference_bump(), g, n).unwrap()
    }

    #[test]
    fn unit_kernel_is_weight_outer_product() {
        let g = build_grid([(-1.0, 1.0); 4], 4).unwrap();
        let a = to_nodal(&assemble_kernel(&UnitKernel, &g).unwrap(), &g);
        for ((_, j), x) in a.indexed_iter() {
            assert!((x - g.weights[j]).abs() < 1e-15);
        }
    }

    #[test]
    fn singularity_guard() {
        let g = build_grid([(-1.0, 1.0); 4], 4).unwrap();
        let k = FnKernel {
            value: |r: f64| r.powi(-4),
            mean: |_| f64::INFINITY,
            order: 4.0,
        };
        assert!(matches!(assemble_kernel(&k, &g), Err(Error::NonIntegrable(_))));
    }

    #[test]
    fn g2_matrix_has_low_rank() {
        // |x − y|² has rank ≤ 6; the ball-mean diagonal adds a diagonal
        // perturbation, so by Weyl's inequality σ₁₆ ≤ max diagonal correction.
        use ndarray_linalg::SVD;
        let g = build_grid([(-1.0, 1.0); 4], 5).unwrap();
        let a = assemble_kernel(&G2Kernel, &g).unwrap();
        let correction = (0..g.len()).map(|i| a[[i, i]]).fold(0.0_f64, f64::max);
        let (_, s, _) = a.svd(false, false).unwrap();
        assert!(s[15] <= correction * (1.0 + 1e-10), "{} > {correction}", s[15]);
        let poly = Array2::from_shape_fn((g.len(), g.len()), |(i, j)| {
            G2Kernel.value(g.distance(i, j)) * (g.weights[i] * g.weights[j]).sqrt()
        });
        assert!(crate::linalg::numerical_rank(&poly, 1e-10).unwrap() <= 15);
    }

    #[test]
    fn operators_are_symmetric() {
        let p = bump(5.0, 6);
        let t = assemble_t(&p).unwrap();
        assert!(symmetry_residual(t.view()) < 1e-14);
        let vgv = assemble_vgv(&p).unwrap();
        for m in [&vgv.g1, &vgv.g2, &vgv.g3] {
            assert!(symmetry_residual(m.view()) < 1e-14);
        }
        let m = assemble_m(Sign::Plus, 0.3, &p).unwrap();
        assert!(symmetry_residual(m.view()) < 1e-14);
    }

    #[test]
    fn empty_potential_gives_identity() {
        let p = Potential::on_box(Shape::Zero, 1.0, 4).unwrap();
        let t = assemble_t(&p).unwrap();
        assert!(frobenius(&(t - crate::linalg::identity(p.len()))) == 0.0);
        assert!(matches!(assemble_p(&p), Err(Error::ZeroPotential)));
    }

    #[test]
    fn p_is_rank_one_projection() {
        let p = bump(5.0, 6);
        let pm = assemble_p(&p).unwrap();
        assert!(frobenius(&(pm.dot(&pm) - &pm)) < 1e-12);
        assert!((pm.diag().sum() - 1.0).abs() < 1e-12);
        let u = ndarray::Array1::from(p.weighted_v());
        assert!(frobenius(&(pm.dot(&u) - &u).insert_axis(ndarray::Axis(1))) < 1e-12);
    }

    #[test]
    fn tiny_coupling_t_is_invertible() {
        let p = bump(0.01, 6);
        let t = assemble_t(&p).unwrap();
        let (w, _) = crate::linalg::eigh(&t).unwrap();
        let smin = w.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
        assert!(smin > 0.9);
    }

    #[test]
    fn conjugation_symmetry_of_m() {
        let p = bump(5.0, 5);
        let mp = assemble_m(Sign::Plus, 0.2, &p).unwrap();
        let mm = assemble_m(Sign::Minus, 0.2, &p).unwrap();
        assert_eq!(mm, crate::linalg::conj(&mp));
    }

    #[test]
    fn lambda_guard() {
        let p = bump(5.0, 5);
        assert!(matches!(
            assemble_m(Sign::Plus, 100.0, &p),
            Err(Error::Unresolved { .. })
        ));
    }

    #[test]
    fn m_tends_to_t() {
        let p = bump(5.0, 5);
        let t = crate::linalg::to_complex(&assemble_t(&p).unwrap());
        let d1 = frobenius(&(assemble_m(Sign::Plus, 1e-2, &p).unwrap() - &t));
        let d2 = frobenius(&(assemble_m(Sign::Plus, 1e-3, &p).unwrap() - &t));
        let slope = (d1 / d2).log10();
        assert!(slope > 1.7 && slope < 2.3, "slope {slope}");
    }
}
