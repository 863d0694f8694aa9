//! Pointwise kernels of `R_V±(λ²)` and of the jump `R_V⁺ − R_V⁻`.
//!
//! The finite Born series
//!
//! ```text
//! R_V = R₀ − R₀VR₀ + R₀VR₀VR₀ − R₀VR₀v M⁻¹ vR₀VR₀
//! ```
//!
//! is evaluated with the grid quadrature. The jump is built term by term
//! from `A⁺B⁺ − A⁻B⁻ = ΔA·B⁺ + A⁻·ΔB` and `ΔM⁻¹ = −M⁻⁻¹ ΔM M⁺⁻¹`, so no
//! large plus-branch value is ever subtracted from its conjugate.

use crate::linalg::{self, CMat, RMat};
use crate::operator::{assemble_kernel, dist, G0Kernel, RegularResolventKernel};
use crate::specfun::{self, Sign};
use crate::spectral::{jn_factor, JnFactor, SpectralData};
use crate::{Error, Result, C64};
use ndarray::Array1;
use std::f64::consts::PI;

type CVec = Array1<C64>;

/// `λ`-independent data shared by every evaluation.
pub struct ResolventContext<'a> {
    spectral: Option<&'a SpectralData>,
    /// `Ĝ₀` in the symmetric basis.
    g0: RMat,
    sw: Vec<f64>,
}

impl<'a> ResolventContext<'a> {
    /// `None` or a vanishing potential gives the free resolvent.
    pub fn new(spectral: Option<&'a SpectralData>) -> Result<ResolventContext<'a>> {
        let spectral = spectral.filter(|s| !s.potential.is_zero());
        let (g0, sw) = match spectral {
            Some(s) => (
                assemble_kernel(&G0Kernel, &s.potential.grid)?,
                s.potential.grid.weights.iter().map(|w| w.sqrt()).collect(),
            ),
            None => (RMat::zeros((0, 0)), Vec::new()),
        };
        Ok(ResolventContext { spectral, g0, sw })
    }

    pub fn is_free(&self) -> bool {
        self.spectral.is_none()
    }

    pub fn spectral(&self) -> Option<&'a SpectralData> {
        self.spectral
    }

    /// Largest λ at which the grid terms are trusted; unbounded when free.
    pub fn lambda_limit(&self) -> f64 {
        match self.spectral {
            Some(s) => crate::operator::lambda_limit(&s.potential),
            None => f64::INFINITY,
        }
    }

    /// Assemble and factor everything that depends on `λ` only.
    pub fn at(&self, lambda: f64) -> Result<LambdaSlice<'_>> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain {
                op: "ResolventContext::at",
                detail: format!("λ = {lambda}"),
            });
        }
        let grid = match self.spectral {
            None => {
                return Ok(LambdaSlice {
                    ctx: self,
                    lambda,
                    grid: None,
                })
            }
            Some(s) => s,
        };
        let p = &grid.potential;
        let reg = assemble_kernel(
            &RegularResolventKernel {
                sign: Sign::Plus,
                lambda,
            },
            &p.grid,
        )?;
        let n = p.len();
        let mut r0 = reg.clone();
        r0.zip_mut_with(&self.g0, |a, &b| *a += b);
        let dr0 = reg.mapv(|z| C64::new(0.0, 2.0 * z.im));
        let sandwich = |a: &CMat| {
            let mut out = a.clone();
            for ((i, j), x) in out.indexed_iter_mut() {
                *x *= p.v[i] * p.v[j];
            }
            out
        };
        let m0 = sandwich(&reg);
        let dm = sandwich(&dr0);
        let factor = jn_factor(grid, &m0)?;
        Ok(LambdaSlice {
            ctx: self,
            lambda,
            grid: Some(GridTerms {
                spectral: grid,
                r0,
                dr0,
                dm,
                factor,
                n,
            }),
        })
    }
}

struct GridTerms<'a> {
    spectral: &'a SpectralData,
    /// `R̂₀⁺`.
    r0: CMat,
    /// `R̂₀⁺ − R̂₀⁻`.
    dr0: CMat,
    /// `M⁺ − M⁻`.
    dm: CMat,
    factor: JnFactor,
    n: usize,
}

/// Everything at a fixed `λ`.
pub struct LambdaSlice<'a> {
    ctx: &'a ResolventContext<'a>,
    pub lambda: f64,
    grid: Option<GridTerms<'a>>,
}

/// Per-point vectors at a fixed `λ`.
pub struct PointData {
    x: [f64; 4],
    /// `√w R₀⁺(x, ·)`.
    b: CVec,
    db: CVec,
    /// `R̂₀⁺ V b`.
    k: CVec,
    dk: CVec,
    /// `v ⊙ k`.
    l: CVec,
    dl: CVec,
    /// `M⁺⁻¹ l`.
    xs: CVec,
}

/// Plus-branch value and jump of `R_V` at one pair.
#[derive(Debug, Clone, Copy)]
pub struct PairValue {
    pub plus: C64,
    pub jump: C64,
}

fn cdot(a: &CVec, b: &CVec) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn conj(a: &CVec) -> CVec {
    a.mapv(|z| z.conj())
}

impl LambdaSlice<'_> {
    pub fn point(&self, x: &[f64; 4]) -> Result<PointData> {
        let g = match &self.grid {
            None => {
                let e = CVec::zeros(0);
                return Ok(PointData {
                    x: *x,
                    b: e.clone(),
                    db: e.clone(),
                    k: e.clone(),
                    dk: e.clone(),
                    l: e.clone(),
                    dl: e.clone(),
                    xs: e,
                });
            }
            Some(g) => g,
        };
        let p = &g.spectral.potential;
        let lambda = self.lambda;
        let mut b = CVec::zeros(g.n);
        for (i, y) in p.grid.nodes.iter().enumerate() {
            let r = dist(x, y);
            if r == 0.0 {
                return Err(Error::Domain {
                    op: "LambdaSlice::point",
                    detail: format!("probe {x:?} coincides with a grid node"),
                });
            }
            let reg = specfun::free_resolvent_regular(Sign::Plus, lambda, r);
            b[i] = (reg + 1.0 / (4.0 * PI * PI * r * r)) * self.ctx.sw[i];
        }
        let db = b.mapv(|z| C64::new(0.0, 2.0 * z.im));
        let vb = Array1::from_shape_fn(g.n, |i| b[i] * p.samples[i]);
        let vdb = Array1::from_shape_fn(g.n, |i| db[i] * p.samples[i]);
        let k = g.r0.dot(&vb);
        let dk = g.dr0.dot(&vb) + linalg::conj(&g.r0).dot(&vdb);
        let l = Array1::from_shape_fn(g.n, |i| k[i] * p.v[i]);
        let dl = Array1::from_shape_fn(g.n, |i| dk[i] * p.v[i]);
        let xs = g.factor.apply(&l)?;
        Ok(PointData {
            x: *x,
            b,
            db,
            k,
            dk,
            l,
            dl,
            xs,
        })
    }

    pub fn pair(&self, px: &PointData, py: &PointData) -> Result<PairValue> {
        let r = dist(&px.x, &py.x);
        let lambda = self.lambda;
        let free = specfun::free_resolvent_kernel(Sign::Plus, lambda, r)?;
        let free_jump = specfun::free_resolvent_jump(lambda, r);
        let g = match &self.grid {
            None => {
                return Ok(PairValue {
                    plus: free,
                    jump: free_jump,
                })
            }
            Some(g) => g,
        };
        let samples = &g.spectral.potential.samples;
        let weigh = |a: &CVec| Array1::from_shape_fn(g.n, |i| a[i] * samples[i]);
        let vby = weigh(&py.b);
        let vky = weigh(&py.k);
        let bx_conj = conj(&px.b);
        let xx_conj = conj(&px.xs);

        let plus = free - cdot(&px.b, &vby) + cdot(&px.b, &vky) - cdot(&px.l, &py.xs);

        let t2 = cdot(&px.db, &vby) + cdot(&bx_conj, &weigh(&py.db));
        let t3 = cdot(&px.db, &vky) + cdot(&bx_conj, &weigh(&py.dk));
        let t4 = cdot(&px.dl, &py.xs) - cdot(&xx_conj, &g.dm.dot(&py.xs)) + cdot(&xx_conj, &py.dl);
        Ok(PairValue {
            plus,
            jump: free_jump - t2 + t3 - t4,
        })
    }

    /// Two-term symmetric identity `R₀ − R₀v M⁻¹ vR₀` with a dense inverse.
    pub fn two_term(&self, x: &[f64; 4], y: &[f64; 4]) -> Result<C64> {
        let free = specfun::free_resolvent_kernel(Sign::Plus, self.lambda, dist(x, y))?;
        let g = match &self.grid {
            None => return Ok(free),
            Some(g) => g,
        };
        let v = &g.spectral.potential.v;
        let px = self.point(x)?;
        let py = self.point(y)?;
        let vbx = Array1::from_shape_fn(g.n, |i| px.b[i] * v[i]);
        let vby = Array1::from_shape_fn(g.n, |i| py.b[i] * v[i]);
        Ok(free - cdot(&vbx, &g.factor.apply(&vby)?))
    }
}

/// `R_V±(λ²)(x, y)`.
pub fn perturbed_resolvent_kernel(
    sign: Sign,
    lambda: f64,
    x: &[f64; 4],
    y: &[f64; 4],
    spectral: Option<&SpectralData>,
) -> Result<C64> {
    let ctx = ResolventContext::new(spectral)?;
    let slice = ctx.at(lambda)?;
    let v = slice.pair(&slice.point(x)?, &slice.point(y)?)?;
    Ok(sign.apply(v.plus))
}

/// `λχ(λ)(R_V⁺ − R_V⁻)(x, y)/(πi)`, the density of `dE(λ²)` in `λ`.
pub fn stone_integrand(
    lambda: f64,
    x: &[f64; 4],
    y: &[f64; 4],
    spectral: Option<&SpectralData>,
    cutoff: &super::CutoffSpec,
) -> Result<C64> {
    let chi = cutoff.chi(lambda);
    if chi == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let ctx = ResolventContext::new(spectral)?;
    let slice = ctx.at(lambda)?;
    let v = slice.pair(&slice.point(x)?, &slice.point(y)?)?;
    Ok(v.jump * (lambda * chi) / C64::new(0.0, PI))
}
