//! The s-wave reduction of `H = −Δ + V` on `(0, R]` with measure `2π²r³dr`.
//!
//! Cell-centered nodes `rᵢ = (i − ½)h`; the flux form
//!
//! ```text
//! (Hu)ᵢ = −[r³_{i+½}(u_{i+1} − uᵢ) − r³_{i−½}(uᵢ − u_{i−1})]/(h² rᵢ³) + V(rᵢ)uᵢ
//! ```
//!
//! is regular at the origin (`r_{½} = 0`) and takes `u(R) = 0` through the
//! ghost value `u_{N+1} = −u_N`. Conjugating by `diag(rᵢ^{3/2})` gives a
//! symmetric tridiagonal matrix.

use crate::specfun::Sign;
use crate::{Error, Result, C64};
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct RadialOperator {
    pub h: f64,
    pub radius: f64,
    pub r: Vec<f64>,
    pub potential: Vec<f64>,
    /// Symmetric form: diagonal and off-diagonal.
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl RadialOperator {
    pub fn new<F: Fn(f64) -> f64>(radius: f64, h: f64, potential: F) -> Result<RadialOperator> {
        if !(h > 0.0 && radius > 4.0 * h) {
            return Err(Error::Domain {
                op: "RadialOperator::new",
                detail: format!("R = {radius}, h = {h}"),
            });
        }
        let n = (radius / h).round() as usize;
        let h = radius / n as f64;
        let r: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) * h).collect();
        let face = |i: usize| (i as f64 * h).powi(3);
        let potential: Vec<f64> = r.iter().map(|&x| potential(x)).collect();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        for i in 0..n {
            let right = if i + 1 == n { 2.0 * face(n) } else { face(i + 1) };
            diag[i] = (face(i) + right) / (h * h * r[i].powi(3)) + potential[i];
            if i + 1 < n {
                off[i] = -face(i + 1) / (h * h * (r[i] * r[i + 1]).powf(1.5));
            }
        }
        Ok(RadialOperator {
            h,
            radius,
            r,
            potential,
            diag,
            off,
        })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// `Hu` in the physical (unsymmetrized) form.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let s = self.r[i].powf(1.5);
                let mut acc = self.diag[i] * u[i] * s;
                if i > 0 {
                    acc += self.off[i - 1] * u[i - 1] * self.r[i - 1].powf(1.5);
                }
                if i + 1 < n {
                    acc += self.off[i] * u[i + 1] * self.r[i + 1].powf(1.5);
                }
                acc / s
            })
            .collect()
    }

    /// `∫ u w 2π² r³ dr` by the midpoint rule.
    pub fn inner(&self, u: &[f64], w: &[f64]) -> f64 {
        2.0 * PI * PI * self.h * self.r.iter().zip(u).zip(w).map(|((r, a), b)| r.powi(3) * a * b).sum::<f64>()
    }

    /// `|⟨Hu, w⟩ − ⟨u, Hw⟩| / (‖Hu‖‖w‖)` for two fixed test vectors.
    pub fn symmetry_residual(&self) -> f64 {
        let u: Vec<f64> = self.r.iter().map(|r| (-r * r).exp() * (1.0 + r)).collect();
        let w: Vec<f64> = self.r.iter().map(|r| (2.0 * r).cos() / (1.0 + r * r)).collect();
        let hu = self.apply(&u);
        let hw = self.apply(&w);
        let a = self.inner(&hu, &w);
        let b = self.inner(&u, &hw);
        (a - b).abs() / (self.inner(&hu, &hu).sqrt() * self.inner(&w, &w).sqrt())
    }

    /// Number of eigenvalues below `x` (Sturm sequence).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.len() {
            let b2 = if i > 0 { self.off[i - 1].powi(2) } else { 0.0 };
            d = self.diag[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = -1e-300;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin bounds of the spectrum.
    fn bounds(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut s = 0.0;
            if i > 0 {
                s += self.off[i - 1].abs();
            }
            if i + 1 < n {
                s += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - s);
            hi = hi.max(self.diag[i] + s);
        }
        (lo, hi)
    }

    /// `k`-th smallest eigenvalue (0-based) by bisection.
    fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.bounds();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1e-300) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector of the symmetric form for an isolated eigenvalue, by inverse iteration.
    fn eigenvector(&self, mu: f64) -> Result<Vec<f64>> {
        let n = self.len();
        let shift = mu - 1e-10 * mu.abs().max(1.0);
        let diag: Vec<C64> = self.diag.iter().map(|d| C64::new(d - shift, 0.0)).collect();
        let mut x = vec![C64::new(1.0, 0.0); n];
        for _ in 0..3 {
            x = thomas(&self.off, &diag, &x)?;
            let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            x.iter_mut().for_each(|z| *z /= norm);
        }
        Ok(x.iter().map(|z| z.re).collect())
    }
}

/// Solve a symmetric tridiagonal system with complex diagonal.
fn thomas(off: &[f64], diag: &[C64], rhs: &[C64]) -> Result<Vec<C64>> {
    let n = diag.len();
    let mut c = vec![C64::new(0.0, 0.0); n];
    let mut d = vec![C64::new(0.0, 0.0); n];
    let mut denom = diag[0];
    if denom.norm() == 0.0 {
        return Err(Error::Singular("radial tridiagonal solve".into()));
    }
    if n > 1 {
        c[0] = off[0] / denom;
    }
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - off[i - 1] * c[i - 1];
        if denom.norm() == 0.0 {
            return Err(Error::Singular("radial tridiagonal solve".into()));
        }
        if i + 1 < n {
            c[i] = off[i] / denom;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        let next = d[i + 1];
        d[i] -= c[i] * next;
    }
    Ok(d)
}

/// Lowest eigenpairs, eigenfunctions normalized in `L²(2π²r³dr)` with positive value at the origin.
#[derive(Debug, Clone)]
pub struct RadialEigen {
    pub values: Vec<f64>,
    pub functions: Vec<Vec<f64>>,
}

pub fn radial_eigensolve(op: &RadialOperator, count: usize) -> Result<RadialEigen> {
    let count = count.min(op.len());
    let mut values = Vec::with_capacity(count);
    let mut functions = Vec::with_capacity(count);
    for k in 0..count {
        let mu = op.eigenvalue(k);
        let w = op.eigenvector(mu)?;
        let mut u: Vec<f64> = w.iter().zip(&op.r).map(|(w, r)| w / r.powf(1.5)).collect();
        let norm = op.inner(&u, &u).sqrt();
        let sign = if u[0] < 0.0 { -1.0 } else { 1.0 };
        u.iter_mut().for_each(|x| *x *= sign / norm);
        values.push(mu);
        functions.push(u);
    }
    Ok(RadialEigen { values, functions })
}

/// Eigenvalues below `limit`, with eigenfunctions.
pub fn radial_eigensolve_below(op: &RadialOperator, limit: f64) -> Result<RadialEigen> {
    radial_eigensolve(op, op.count_below(limit))
}

/// `(H − λ² ∓ iε)⁻¹ source` at fixed absorption `ε`.
pub fn radial_solve(sign: Sign, lambda: f64, op: &RadialOperator, source: &[f64], eps: f64) -> Result<Vec<C64>> {
    if source.len() != op.len() || !(eps > 0.0) {
        return Err(Error::Domain {
            op: "radial_resolvent",
            detail: format!("source of length {}, ε = {eps}", source.len()),
        });
    }
    let z = C64::new(lambda * lambda, sign.value() * eps);
    let diag: Vec<C64> = op.diag.iter().map(|d| d - z).collect();
    let rhs: Vec<C64> = source
        .iter()
        .zip(&op.r)
        .map(|(f, r)| C64::new(f * r.powf(1.5), 0.0))
        .collect();
    let w = thomas(&op.off, &diag, &rhs)?;
    Ok(w.iter().zip(&op.r).map(|(w, r)| w / r.powf(1.5)).collect())
}

/// [`radial_solve`] extrapolated to `ε → 0` from `ε` and `2ε`.
///
/// The box must be long enough that the outgoing wave is absorbed before it
/// returns: `ε·R/λ ≫ 1`.
pub fn radial_resolvent(
    sign: Sign,
    lambda: f64,
    op: &RadialOperator,
    source: &[f64],
    eps: f64,
) -> Result<Vec<C64>> {
    let u1 = radial_solve(sign, lambda, op, source, eps)?;
    let u2 = radial_solve(sign, lambda, op, source, 2.0 * eps)?;
    Ok(u1.iter().zip(&u2).map(|(a, b)| 2.0 * a - b).collect())
}

/// Coupling `g` at which the lowest eigenvalue of `−Δ + g·profile(r)` crosses zero.
pub fn radial_zero_crossing<F: Fn(f64) -> f64>(
    profile: F,
    bracket: (f64, f64),
    radius: f64,
    h: f64,
) -> Result<f64> {
    let lowest = |g: f64| -> Result<f64> {
        let op = RadialOperator::new(radius, h, |r| g * profile(r))?;
        Ok(op.eigenvalue(0))
    };
    let (mut lo, mut hi) = bracket;
    let (f_lo, f_hi) = (lowest(lo)?, lowest(hi)?);
    if f_lo * f_hi > 0.0 {
        return Err(Error::NoSignChange { lo, hi });
    }
    let increasing = f_hi > f_lo;
    while hi - lo > 1e-10 * hi.abs() {
        let mid = 0.5 * (lo + hi);
        let f = lowest(mid)?;
        if (f > 0.0) == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Value of a cell-centered function at `r` by linear interpolation (even extension at 0).
pub fn interpolate(op: &RadialOperator, u: &[f64], r: f64) -> f64 {
    let s = r / op.h - 0.5;
    if s <= 0.0 {
        let u0 = origin_value(u);
        let q = r / (0.5 * op.h);
        return u0 + (u[0] - u0) * q * q;
    }
    let i = s.floor() as usize;
    if i + 1 >= u.len() {
        return 0.0;
    }
    let f = s - i as f64;
    u[i] * (1.0 - f) + u[i + 1] * f
}

/// Kernel of `sin(t√H)/√H·χ(√H)` between the origin and a point at distance `r`,
/// as a sum over the Dirichlet eigenpairs.
pub fn radial_sin_kernel_at_origin<C: Fn(f64) -> f64>(
    op: &RadialOperator,
    chi: C,
    lambda_max: f64,
    t: f64,
    r: f64,
) -> Result<f64> {
    let eig = radial_eigensolve_below(op, lambda_max * lambda_max)?;
    let mut sum = 0.0;
    for (mu, u) in eig.values.iter().zip(&eig.functions) {
        if *mu <= 0.0 {
            continue;
        }
        let lambda = mu.sqrt();
        let at0 = origin_value(u);
        sum += (t * lambda).sin() / lambda * chi(lambda) * at0 * interpolate(op, u, r);
    }
    Ok(sum)
}

/// `u(0)` from the first two cells of an even function: `u(0) ≈ (9u₁ − u₂)/8`.
pub fn origin_value(u: &[f64]) -> f64 {
    (9.0 * u[0] - u[1]) / 8.0
}
