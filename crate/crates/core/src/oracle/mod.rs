//! Reference values computed without the Birman–Schwinger machinery.
//!
//! - [`free_propagator_exact`]: the Gaussian kernel of `e^{itH}`, `H = −Δ`.
//! - [`RadialOperator`]: finite differences for the s-wave channel of a radial
//!   potential, with eigenpairs, a limiting-absorption resolvent and a wave
//!   eigenfunction sum.
//!
//! Phases follow `e^{itH}`, so the free kernel is `e^{−ir²/4t}/(4πit)²`.

mod radial;

pub use radial::{
    interpolate, origin_value, radial_eigensolve, radial_eigensolve_below, radial_resolvent,
    radial_sin_kernel_at_origin, radial_solve, radial_zero_crossing, RadialEigen, RadialOperator,
};

use crate::{Error, Result, C64};
use std::f64::consts::PI;

/// Kernel of `e^{itH}` for `H = −Δ` on four-dimensional space, at distance `r`.
pub fn free_propagator_exact(t: f64, r: f64) -> Result<C64> {
    if t == 0.0 || !t.is_finite() || !(r >= 0.0) {
        return Err(Error::Domain {
            op: "free_propagator_exact",
            detail: format!("t = {t}, r = {r}"),
        });
    }
    let d = C64::new(0.0, 4.0 * PI * t);
    Ok(C64::from_polar(1.0, -r * r / (4.0 * t)) / (d * d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::Shape;
    use crate::specfun::{self, Sign};

    #[test]
    fn free_propagator_modulus_and_scaling() {
        for &(t, r) in &[(1.0, 0.3), (10.0, 2.0), (-3.0, 5.0)] {
            let v = free_propagator_exact(t, r).unwrap();
            assert!((v.norm() - 1.0 / (4.0 * PI * t).powi(2)).abs() < 1e-15 * v.norm());
            let s = free_propagator_exact(4.0 * t, 2.0 * r).unwrap();
            assert!((s - v / 16.0).norm() < 1e-14 * v.norm());
        }
        assert!(free_propagator_exact(0.0, 1.0).is_err());
    }

    #[test]
    fn radial_operator_is_symmetric() {
        let op = RadialOperator::new(8.0, 0.01, |r| if r < 1.0 { -20.0 * (1.0 - r * r).powi(2) } else { 0.0 }).unwrap();
        assert!(op.symmetry_residual() < 1e-10, "{}", op.symmetry_residual());
    }

    #[test]
    fn free_spectrum_is_positive_and_second_order() {
        let lowest = |h: f64| {
            let op = RadialOperator::new(5.0, h, |_| 0.0).unwrap();
            radial_eigensolve(&op, 10).unwrap().values
        };
        let (a, b, c) = (lowest(0.04), lowest(0.02), lowest(0.01));
        assert!(a.iter().all(|&x| x > 0.0));
        // First Dirichlet eigenvalue of the s-wave on the 4-ball: (j₁,₁/R)².
        let exact = (3.831_705_970_207_512_3_f64 / 5.0).powi(2);
        assert!((c[0] / exact - 1.0).abs() < 1e-3, "{} vs {exact}", c[0]);
        for k in 0..10 {
            let order = ((a[k] - b[k]) / (b[k] - c[k])).log2();
            assert!((order - 2.0).abs() < 0.3, "eigenvalue {k}: order {order}");
        }
    }

    #[test]
    fn eigenfunctions_are_normalized_and_solve_the_equation() {
        let op = RadialOperator::new(6.0, 0.02, |r| if r < 1.0 { -25.0 * (1.0 - r * r).powi(2) } else { 0.0 }).unwrap();
        let e = radial_eigensolve(&op, 4).unwrap();
        for (mu, u) in e.values.iter().zip(&e.functions) {
            assert!((op.inner(u, u) - 1.0).abs() < 1e-12);
            let hu = op.apply(u);
            let res: Vec<f64> = hu.iter().zip(u).map(|(a, b)| a - mu * b).collect();
            assert!(op.inner(&res, &res).sqrt() < 1e-6 * mu.abs().max(1.0));
        }
        assert!(op.inner(&e.functions[0], &e.functions[1]).abs() < 1e-8);
    }

    #[test]
    fn zero_crossing_brackets_one_bound_state() {
        let profile = |r: f64| Shape::reference_bump().radial_profile(r).unwrap();
        let g = radial_zero_crossing(profile, (1.0, 100.0), 20.0, 0.01).unwrap();
        let above = RadialOperator::new(20.0, 0.01, |r| 1.02 * g * profile(r)).unwrap();
        let e = radial_eigensolve(&above, 3).unwrap();
        assert!(e.values[0] < 0.0 && e.values[1] > 0.0, "{:?}", e.values);
        let below = RadialOperator::new(20.0, 0.01, |r| 0.98 * g * profile(r)).unwrap();
        assert!(radial_eigensolve(&below, 1).unwrap().values[0] > 0.0);
    }

    #[test]
    fn zero_crossing_matches_tune_coupling() {
        let shape = Shape::reference_bump();
        let g = radial_zero_crossing(|r| shape.radial_profile(r).unwrap(), (1.0, 100.0), 100.0, 0.01).unwrap();
        let tuned = crate::spectral::tune_coupling(&shape, (1.0, 100.0), 11, &[Some(1); 4]).unwrap();
        assert!((tuned.g_star / g - 1.0).abs() < 0.02, "{} vs {g}", tuned.g_star);
    }

    /// Radial charge and its closed-form outgoing potential outside the support:
    /// `u(r₀) = R₀⁺(r₀)·∫ ρ(s)·2J₁(λs)/(λs)·2π²s³ ds`.
    #[test]
    fn free_radial_resolvent_matches_closed_form() {
        let rho = |r: f64| if r < 1.0 { (1.0 - r * r).powi(2) } else { 0.0 };
        let lambda = 1.0;
        let op = RadialOperator::new(400.0, 0.02, |_| 0.0).unwrap();
        let source: Vec<f64> = op.r.iter().map(|&r| rho(r)).collect();
        let u = radial_resolvent(Sign::Plus, lambda, &op, &source, 0.05).unwrap();
        let (x, w) = crate::operator::gauss_legendre(40);
        let moment: f64 = x
            .iter()
            .zip(&w)
            .map(|(xi, wi)| {
                let s = 0.5 * (xi + 1.0);
                0.5 * wi * rho(s) * 2.0 * specfun::bessel_j1(lambda * s) / (lambda * s) * 2.0 * PI * PI * s.powi(3)
            })
            .sum();
        for &r0 in &[2.0, 3.5] {
            let exact = specfun::free_resolvent_kernel(Sign::Plus, lambda, r0).unwrap() * moment;
            let i = op.r.iter().position(|&r| r > r0).unwrap();
            let f = (r0 - op.r[i - 1]) / op.h;
            let got = u[i - 1] * (1.0 - f) + u[i] * f;
            assert!((got - exact).norm() < 1e-2 * exact.norm(), "r={r0}: {got} vs {exact}");
        }
    }

    #[test]
    fn resolvent_residual_and_linear_absorption_dependence() {
        let op = RadialOperator::new(400.0, 0.02, |r| if r < 1.0 { -5.0 * (1.0 - r * r).powi(2) } else { 0.0 }).unwrap();
        let source: Vec<f64> = op.r.iter().map(|&r| (-4.0 * r * r).exp()).collect();
        let (lambda, eps) = (0.8, 0.05);
        for sign in [Sign::Plus, Sign::Minus] {
            let u = radial_solve(sign, lambda, &op, &source, eps).unwrap();
            let re: Vec<f64> = u.iter().map(|z| z.re).collect();
            let im: Vec<f64> = u.iter().map(|z| z.im).collect();
            let (hre, him) = (op.apply(&re), op.apply(&im));
            let s = sign.value() * eps;
            let mut worst = 0.0_f64;
            for i in 0..op.len() {
                let r_re = hre[i] - lambda * lambda * re[i] + s * im[i] - source[i];
                let r_im = him[i] - lambda * lambda * im[i] - s * re[i];
                worst = worst.max(r_re.hypot(r_im));
            }
            assert!(worst < 1e-10, "{worst}");
        }
        let probe = op.r.iter().position(|&r| r > 2.0).unwrap();
        let raw = |e: f64| radial_solve(Sign::Plus, lambda, &op, &source, e).unwrap()[probe];
        let (a, b, c) = (raw(0.08), raw(0.04), raw(0.02));
        let ratio = (a - b).norm() / (b - c).norm();
        assert!((ratio - 2.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn sin_flow_matches_eigenfunction_sum() {
        use crate::propagator::{CutoffSpec, Flow, ProbePair, Propagator, DEFAULT_QUAD_TOL};
        let cutoff = CutoffSpec::new(3.0, 4).unwrap();
        let op = RadialOperator::new(20.0, 0.02, |_| 0.0).unwrap();
        let (t, r) = (5.0, 1.0);
        let oracle = radial_sin_kernel_at_origin(&op, |l| cutoff.chi(l), cutoff.lambda1, t, r).unwrap();
        let pair = ProbePair {
            x: [0.0; 4],
            y: [r, 0.0, 0.0, 0.0],
        };
        let p = Propagator::new(None, &[pair], cutoff, DEFAULT_QUAD_TOL).unwrap();
        let v = p.kernel(Flow::WaveSin, t).values[0];
        assert!(v.im.abs() < 1e-12);
        assert!((v.re - oracle).abs() < 1e-2 * oracle.abs(), "{} vs {oracle}", v.re);
    }
}
