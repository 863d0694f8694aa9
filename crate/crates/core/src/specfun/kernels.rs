use super::bessel::{bessel_all, bessel_j1, bessel_y1_regular, EULER_GAMMA};
use super::{expansion_constants, ExpansionConstants, Sign};
use crate::{Error, Result, C64};
use std::f64::consts::PI;

const PI2: f64 = PI * PI;

/// Largest `λρ` for which ball means use the term-wise series.
const BALL_SERIES_LIMIT: f64 = 4.0;

fn check_r(op: &'static str, r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            op,
            detail: format!("r = {r}"),
        })
    }
}

pub fn g0_kernel(r: f64) -> Result<f64> {
    check_r("g0_kernel", r)?;
    Ok(1.0 / (4.0 * PI2 * r * r))
}

pub fn g1_kernel(r: f64) -> Result<f64> {
    check_r("g1_kernel", r)?;
    Ok(-r.ln() / (8.0 * PI2))
}

pub fn g2_kernel(r: f64) -> Result<f64> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Domain {
            op: "g2_kernel",
            detail: format!("r = {r}"),
        });
    }
    Ok(expansion_constants().c2 * r * r)
}

pub fn g3_kernel(r: f64) -> Result<f64> {
    check_r("g3_kernel", r)?;
    Ok(expansion_constants().c3 * r * r * r.ln())
}

/// `R₀±(λ²)(r)`.
pub fn free_resolvent_kernel(sign: Sign, lambda: f64, r: f64) -> Result<C64> {
    check_r("free_resolvent_kernel", r)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain {
            op: "free_resolvent_kernel",
            detail: format!("λ = {lambda}"),
        });
    }
    let b = bessel_all(lambda * r)?;
    let s = lambda / (8.0 * PI * r);
    Ok(C64::new(-s * b.y1, sign.value() * s * b.j1))
}

/// `R₀±(λ²)(r) − G₀(r)`, continuous down to `r = 0`.
pub fn free_resolvent_regular(sign: Sign, lambda: f64, r: f64) -> C64 {
    if r == 0.0 {
        return C64::new(f64::NEG_INFINITY, sign.value() * lambda * lambda / (16.0 * PI));
    }
    let z = lambda * r;
    let s = lambda / (8.0 * PI * r);
    C64::new(-s * bessel_y1_regular(z), sign.value() * s * bessel_j1(z))
}

/// `R₀⁺ − R₀⁻ = iλJ₁(λr)/(4πr)`, finite at `r = 0`.
pub fn free_resolvent_jump(lambda: f64, r: f64) -> C64 {
    let v = if r == 0.0 {
        lambda * lambda / (8.0 * PI)
    } else {
        lambda * bessel_j1(lambda * r) / (4.0 * PI * r)
    };
    C64::new(0.0, v)
}

/// Mean of `r^{2k}` over the 4D ball of radius `ρ`.
pub fn ball_mean_power(k: u32, rho: f64) -> f64 {
    2.0 * rho.powi(2 * k as i32) / (k as f64 + 2.0)
}

/// Mean of `r^{2k} log r` over the 4D ball of radius `ρ`.
pub fn ball_mean_log(k: u32, rho: f64) -> f64 {
    ball_mean_power(k, rho) * (rho.ln() - 1.0 / (2.0 * k as f64 + 4.0))
}

/// Ball means of `(λ/(8πr))J₁(λr)` and `(λ/(8πr))Y₁reg(λr)` from the series.
fn regular_parts_ball_mean(lambda: f64, rho: f64) -> (f64, f64) {
    let zeta = lambda * rho;
    let q = -0.25 * zeta * zeta;
    let mut alpha = 1.0; // (-ζ²/4)^k/(k!(k+1)!)
    let mut h = 0.0;
    let mut j_sum = 0.0;
    let mut y_sum = 0.0;
    let log_half = (0.5 * zeta).ln();
    for k in 0..120u32 {
        let kf = k as f64;
        if k > 0 {
            alpha *= q / (kf * (kf + 1.0));
            h += 1.0 / kf;
        }
        let m = 2.0 / (kf + 2.0);
        let psi_sum = 2.0 * h + 1.0 / (kf + 1.0) - 2.0 * EULER_GAMMA;
        let dj = alpha * m;
        let dy = alpha * m * ((2.0 / PI) * (log_half - 1.0 / (2.0 * kf + 4.0)) - psi_sum / PI);
        j_sum += dj;
        y_sum += dy;
        if k > 2 && dj.abs() < 1e-18 * j_sum.abs() && dy.abs() < 1e-18 * y_sum.abs().max(1e-300) {
            break;
        }
    }
    let pre = lambda * lambda / (16.0 * PI);
    (pre * j_sum, pre * y_sum)
}

/// Ball mean of `f(r)` by Gauss–Legendre in `r` with the `r³` volume weight.
fn ball_mean_quadrature<F: Fn(f64) -> C64>(f: F, rho: f64) -> C64 {
    let (x, w) = crate::operator::gauss_legendre(64);
    let mut acc = C64::new(0.0, 0.0);
    for (xi, wi) in x.iter().zip(&w) {
        let r = 0.5 * rho * (xi + 1.0);
        acc += f(r) * (wi * 0.5 * rho * r.powi(3));
    }
    acc * (4.0 / rho.powi(4))
}

/// Ball mean of `R₀± − G₀`.
pub fn free_resolvent_regular_ball_mean(sign: Sign, lambda: f64, rho: f64) -> C64 {
    if lambda * rho <= BALL_SERIES_LIMIT {
        let (j, y) = regular_parts_ball_mean(lambda, rho);
        C64::new(-y, sign.value() * j)
    } else {
        ball_mean_quadrature(|r| free_resolvent_regular(sign, lambda, r), rho)
    }
}

/// Ball mean of `R₀±`.
pub fn free_resolvent_ball_mean(sign: Sign, lambda: f64, rho: f64) -> C64 {
    free_resolvent_regular_ball_mean(sign, lambda, rho) + 1.0 / (2.0 * PI2 * rho * rho)
}

/// Ball mean of `R₀⁺ − R₀⁻`.
pub fn free_resolvent_jump_ball_mean(lambda: f64, rho: f64) -> C64 {
    if lambda * rho <= BALL_SERIES_LIMIT {
        C64::new(0.0, 2.0 * regular_parts_ball_mean(lambda, rho).0)
    } else {
        ball_mean_quadrature(|r| free_resolvent_jump(lambda, r), rho)
    }
}

/// `(g₁±(λ), g₂±(λ))`.
pub fn g_scalars(sign: Sign, lambda: f64) -> Result<(C64, C64)> {
    g_scalars_with(expansion_constants(), sign, lambda)
}

/// [`g_scalars`] with explicit constants.
pub fn g_scalars_with(c: &ExpansionConstants, sign: Sign, lambda: f64) -> Result<(C64, C64)> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Domain {
            op: "g_scalars",
            detail: format!("λ = {lambda}"),
        });
    }
    let l = lambda.ln();
    let g1 = (c.z1 + c.a1 * l) * (lambda * lambda);
    let g2 = (c.z2 + c.a2 * l) * lambda.powi(4);
    Ok((sign.apply(g1), sign.apply(g2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugate_symmetry() {
        for &(l, r) in &[(0.01, 0.3), (0.5, 2.0), (3.0, 7.0)] {
            let p = free_resolvent_kernel(Sign::Plus, l, r).unwrap();
            let m = free_resolvent_kernel(Sign::Minus, l, r).unwrap();
            assert_eq!(p, m.conj());
            let (g1p, g2p) = g_scalars(Sign::Plus, 0.1).unwrap();
            let (g1m, g2m) = g_scalars(Sign::Minus, 0.1).unwrap();
            assert_eq!(g1p, g1m.conj());
            assert_eq!(g2p, g2m.conj());
        }
    }

    #[test]
    fn jump_is_bessel_j1() {
        for &(l, r) in &[(0.01, 0.3), (0.5, 2.0), (3.0, 7.0), (1.0, 40.0)] {
            let p = free_resolvent_kernel(Sign::Plus, l, r).unwrap();
            let m = free_resolvent_kernel(Sign::Minus, l, r).unwrap();
            let expect = l * bessel_j1(l * r) / (4.0 * PI * r);
            assert!(((p - m).im - expect).abs() <= 1e-12 * expect.abs());
            assert_eq!((p - m).re, 0.0);
            assert!((free_resolvent_jump(l, r).im - expect).abs() <= 1e-14 * expect.abs());
        }
    }

    #[test]
    fn small_argument_limit_is_g0() {
        for &(l, r) in &[(1e-4, 0.5), (1e-3, 1.0)] {
            let ratio = free_resolvent_kernel(Sign::Plus, l, r).unwrap().re / g0_kernel(r).unwrap();
            assert!((ratio - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn large_argument_envelope() {
        let r = 5.0;
        let l = 10.0;
        let v = free_resolvent_kernel(Sign::Plus, l, r).unwrap().norm();
        assert!(v <= l.sqrt() * r.powf(-1.5));
    }

    #[test]
    fn cross_identity_for_constant_part() {
        let (l, r) = (1e-2, 1e-1);
        let jump = free_resolvent_jump(l, r).im;
        let (g1p, _) = g_scalars(Sign::Plus, l).unwrap();
        let (g1m, _) = g_scalars(Sign::Minus, l).unwrap();
        let expected = l * l / (8.0 * PI);
        assert!(((g1p - g1m).im - expected).abs() < 1e-12 * expected);
        assert!((jump - expected).abs() < 1e-3 * expected);
    }

    #[test]
    fn g2_difference_is_imaginary_quartic() {
        let mut c = None;
        for l in [1e-3, 1e-2, 0.3] {
            let (_, p) = g_scalars(Sign::Plus, l).unwrap();
            let (_, m) = g_scalars(Sign::Minus, l).unwrap();
            let d = (p - m) / l.powi(4);
            assert_eq!(d.re, 0.0);
            let prev = *c.get_or_insert(d.im);
            assert!((d.im - prev).abs() < 1e-14);
        }
    }

    #[test]
    fn simple_kernels() {
        assert_eq!(g1_kernel(1.0).unwrap(), 0.0);
        let a = g2_kernel(0.7).unwrap() / 0.49;
        let b = g2_kernel(3.0).unwrap() / 9.0;
        assert!((a - b).abs() < 1e-15);
        assert!(g0_kernel(0.0).is_err() && g1_kernel(0.0).is_err() && g3_kernel(0.0).is_err());
        assert_eq!(g2_kernel(0.0).unwrap(), 0.0);
    }

    #[test]
    fn ball_means_match_quadrature() {
        let rho = 0.3;
        for k in 0..3 {
            let p = ball_mean_quadrature(|r| C64::new(r.powi(2 * k as i32), 0.0), rho).re;
            let l = ball_mean_quadrature(|r| C64::new(r.powi(2 * k as i32) * r.ln(), 0.0), rho).re;
            assert!((p - ball_mean_power(k, rho)).abs() < 1e-14);
            assert!((l - ball_mean_log(k, rho)).abs() < 1e-12);
        }
        for lambda in [1e-3, 0.5, 3.0, 12.0] {
            let a = free_resolvent_regular_ball_mean(Sign::Plus, lambda, rho);
            let b = ball_mean_quadrature(|r| free_resolvent_regular(Sign::Plus, lambda, r), rho);
            assert!((a - b).norm() < 1e-10 * b.norm().max(1e-8), "λ={lambda}: {a} vs {b}");
            let ja = free_resolvent_jump_ball_mean(lambda, rho);
            let jb = ball_mean_quadrature(|r| free_resolvent_jump(lambda, r), rho);
            assert!((ja - jb).norm() < 1e-12 * jb.norm());
        }
    }
}
