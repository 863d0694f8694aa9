//! Filon–Legendre quadrature for `∫ e^{iωu} p(u) du` on panels.
//!
//! On a panel `u = m + h·s`, the amplitude is expanded as `Σ cₖPₖ(s)` from
//! its values at Gauss–Legendre nodes, and the moments
//! `∫₋₁¹ Pₖ(s) e^{iκs} ds = 2iᵏ jₖ(κ)` are exact for any frequency.

use crate::operator::gauss_legendre;
use crate::{Error, Result, C64};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Nodes per panel.
pub const PANEL_ORDER: usize = 16;

/// Spherical Bessel functions `j₀(x) … j_kmax(x)`.
pub fn spherical_bessel_j(kmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    let ax = x.abs();
    if ax < 1.0 {
        // Power series; converges quickly for |x| < 1.
        let mut lead = 1.0;
        for (k, o) in out.iter_mut().enumerate() {
            if k > 0 {
                lead *= ax / (2 * k + 1) as f64;
            }
            let mut term = 1.0;
            let mut sum = 1.0;
            for m in 1..30 {
                term *= -ax * ax / (2.0 * m as f64 * (2 * k + 2 * m + 1) as f64);
                sum += term;
                if term.abs() < 1e-17 * sum.abs() {
                    break;
                }
            }
            *o = lead * sum;
        }
    } else if ax > kmax as f64 {
        out[0] = ax.sin() / ax;
        if kmax > 0 {
            out[1] = ax.sin() / (ax * ax) - ax.cos() / ax;
        }
        for k in 1..kmax {
            out[k + 1] = (2 * k + 1) as f64 / ax * out[k] - out[k - 1];
        }
    } else {
        // Miller's backward recurrence, normalized by j₀ or j₁.
        let start = kmax + 20 + ax as usize;
        let mut next = 0.0;
        let mut cur = 1e-300;
        let mut vals = vec![0.0; start + 1];
        vals[start] = cur;
        for k in (1..=start).rev() {
            let prev = (2 * k + 1) as f64 / ax * cur - next;
            next = cur;
            cur = prev;
            vals[k - 1] = cur;
            if cur.abs() > 1e250 {
                for v in vals.iter_mut().skip(k - 1) {
                    *v *= 1e-250;
                }
                cur *= 1e-250;
                next *= 1e-250;
            }
        }
        let j0 = ax.sin() / ax;
        let j1 = ax.sin() / (ax * ax) - ax.cos() / ax;
        let scale = if j0.abs() > j1.abs() { j0 / vals[0] } else { j1 / vals[1] };
        for k in 0..=kmax {
            out[k] = vals[k] * scale;
        }
    }
    if x < 0.0 {
        for (k, o) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *o = -*o;
            }
        }
    }
    out
}

/// Gauss–Legendre rule and the values-to-coefficients map of one panel.
pub struct PanelRule {
    pub nodes: Vec<f64>,
    /// `transform[k][i] = (2k+1)/2 · wᵢ Pₖ(sᵢ)`.
    transform: Vec<Vec<f64>>,
}

fn legendre_all(n: usize, s: f64) -> Vec<f64> {
    let mut p = vec![0.0; n];
    p[0] = 1.0;
    if n > 1 {
        p[1] = s;
    }
    for k in 1..n.saturating_sub(1) {
        p[k + 1] = ((2 * k + 1) as f64 * s * p[k] - k as f64 * p[k - 1]) / (k + 1) as f64;
    }
    p
}

pub fn panel_rule() -> &'static PanelRule {
    static RULE: OnceLock<PanelRule> = OnceLock::new();
    RULE.get_or_init(|| {
        let (nodes, weights) = gauss_legendre(PANEL_ORDER);
        let mut transform = vec![vec![0.0; PANEL_ORDER]; PANEL_ORDER];
        for (i, (&s, &w)) in nodes.iter().zip(&weights).enumerate() {
            let p = legendre_all(PANEL_ORDER, s);
            for k in 0..PANEL_ORDER {
                transform[k][i] = (2 * k + 1) as f64 / 2.0 * w * p[k];
            }
        }
        PanelRule { nodes, transform }
    })
}

impl PanelRule {
    pub fn coefficients(&self, values: &[f64]) -> Vec<f64> {
        self.transform
            .iter()
            .map(|row| row.iter().zip(values).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Evaluate `Σ cₖPₖ(s)`.
    pub fn evaluate(coefficients: &[f64], s: f64) -> f64 {
        let p = legendre_all(coefficients.len(), s);
        p.iter().zip(coefficients).map(|(a, b)| a * b).sum()
    }
}

/// Size of the two highest Legendre coefficients, the panel's truncation indicator.
pub fn legendre_tail(coefficients: &[f64]) -> f64 {
    let n = coefficients.len();
    coefficients[n - 2].abs() + coefficients[n - 1].abs()
}

/// `∫₋₁¹ Pₖ(s) e^{iκs} ds` for `k = 0 … PANEL_ORDER − 1`.
pub fn filon_moments(kappa: f64) -> [C64; PANEL_ORDER] {
    let j = spherical_bessel_j(PANEL_ORDER - 1, kappa);
    let mut ik = C64::new(1.0, 0.0);
    let mut out = [C64::new(0.0, 0.0); PANEL_ORDER];
    for k in 0..PANEL_ORDER {
        out[k] = ik * (2.0 * j[k]);
        ik *= C64::i();
    }
    out
}

/// `∫_{m−h}^{m+h} e^{iωu} Σ cₖPₖ((u−m)/h) du`.
pub fn filon_panel(coefficients: &[f64], mid: f64, half: f64, omega: f64) -> C64 {
    let moments = filon_moments(omega * half);
    let sum: C64 = coefficients
        .iter()
        .zip(moments.iter())
        .map(|(c, m)| m * *c)
        .sum();
    C64::from_polar(half, omega * mid) * sum
}

/// Phase of an oscillatory integral over `λ`, one per evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flow {
    /// `e^{itλ²}`.
    Schrodinger,
    /// `cos(tλ)`.
    WaveCos,
    /// `sin(tλ)`.
    WaveSin,
}

impl Flow {
    pub const ALL: [Flow; 3] = [Flow::Schrodinger, Flow::WaveCos, Flow::WaveSin];

    pub fn name(self) -> &'static str {
        match self {
            Flow::Schrodinger => "schrodinger",
            Flow::WaveCos => "wave_cos",
            Flow::WaveSin => "wave_sin",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OscillatoryResult {
    pub value: C64,
    pub error: f64,
    pub panels: usize,
}

/// Smallest λ resolved by panels; `[0, λ_min]` is added with `f` frozen at `λ_min`.
pub const LAMBDA_MIN: f64 = 1e-6;

/// `∫_a^b phase(t, λ) f(λ) dλ` by adaptive Filon–Legendre quadrature.
///
/// Panels are geometric towards `a = 0` and bisected until the Legendre tail
/// of the amplitude falls below `tol` relative to its panel scale.
pub fn oscillatory_integral<F: Fn(f64) -> f64>(
    f: F,
    flow: Flow,
    t: f64,
    support: (f64, f64),
    tol: f64,
) -> Result<OscillatoryResult> {
    let (a, b) = support;
    if !(b > a && a >= 0.0 && b.is_finite() && tol > 0.0) {
        return Err(Error::Domain {
            op: "oscillatory_integral",
            detail: format!("support [{a}, {b}], tol {tol}"),
        });
    }
    let rule = panel_rule();
    let mut stack = initial_panels(a, b);
    let mut value = C64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut panels = 0;
    let mut tail = C64::new(0.0, 0.0);
    if a == 0.0 {
        let lo = stack[0].0;
        tail = C64::new(f(lo) * lo, 0.0);
        if flow == Flow::WaveSin {
            tail *= 0.5 * t * lo;
        }
    }
    while let Some((lo, hi)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let lambdas: Vec<f64> = rule.nodes.iter().map(|s| mid + half * s).collect();
        let vals: Vec<f64> = lambdas.iter().map(|&l| f(l)).collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Quadrature(format!("non-finite amplitude on [{lo}, {hi}]")));
        }
        let c = rule.coefficients(&vals);
        let scale = c.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let tail = legendre_tail(&c);
        if tail > tol * scale && half > 1e-9 * (b - a) {
            stack.push((lo, mid));
            stack.push((mid, hi));
            continue;
        }
        if half <= 1e-9 * (b - a) && tail > tol * scale {
            return Err(Error::Quadrature(format!("amplitude unresolved near λ = {mid}")));
        }
        panels += 1;
        let (v, e) = integrate_panel(flow, t, lo, hi, &c, &|l| f(l));
        value += v;
        error += e + tail * 2.0 * half;
    }
    value += tail;
    Ok(OscillatoryResult {
        value,
        error,
        panels,
    })
}

/// Geometric panels from `max(a, λ_min)` to `b`.
pub fn initial_panels(a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let start = if a == 0.0 { LAMBDA_MIN.min(0.5 * b) } else { a };
    let mut hi = b;
    while hi > 2.0 * start {
        out.push((0.5 * hi, hi));
        hi *= 0.5;
    }
    out.push((start, hi));
    out.reverse();
    out
}

/// One panel of `∫ phase(λ) f(λ) dλ` given the λ-Legendre coefficients of `f`.
///
/// The Schrödinger phase is integrated in `u = λ²` after resampling.
fn integrate_panel(
    flow: Flow,
    t: f64,
    lo: f64,
    hi: f64,
    c: &[f64],
    f: &dyn Fn(f64) -> f64,
) -> (C64, f64) {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    match flow {
        Flow::WaveCos => {
            let v = filon_panel(c, mid, half, t);
            (C64::new(v.re, 0.0), 0.0)
        }
        Flow::WaveSin => {
            let v = filon_panel(c, mid, half, t);
            (C64::new(v.im, 0.0), 0.0)
        }
        Flow::Schrodinger => {
            let rule = panel_rule();
            let (ulo, uhi) = (lo * lo, hi * hi);
            let (um, uh) = (0.5 * (ulo + uhi), 0.5 * (uhi - ulo));
            let g: Vec<f64> = rule
                .nodes
                .iter()
                .map(|s| {
                    let l = (um + uh * s).sqrt();
                    f(l) / (2.0 * l)
                })
                .collect();
            let cu = rule.coefficients(&g);
            (filon_panel(&cu, um, uh, t), legendre_tail(&cu) * 2.0 * uh)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn spherical_bessel_reference_values() {
        let j = spherical_bessel_j(15, 2.5);
        assert!((j[5] - 0.007_357_638_737_768_936).abs() < 1e-15, "{}", j[5]);
        let j = spherical_bessel_j(15, 12.0);
        assert!((j[10] - 0.106_622_530_565_504_84).abs() < 1e-14, "{}", j[10]);
        let j = spherical_bessel_j(15, 0.7);
        assert!((j[15] / 2.455_689_117_911_269_6e-20 - 1.0).abs() < 1e-12, "{}", j[15]);
        let j = spherical_bessel_j(15, 40.0);
        assert!((j[3] + 0.019_306_946_387_479_672).abs() < 1e-14, "{}", j[3]);
        let j = spherical_bessel_j(3, -2.0);
        assert!((j[1] + (2f64.sin() / 4.0 - 2f64.cos() / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn moments_match_direct_quadrature() {
        let (x, w) = gauss_legendre(80);
        for &kappa in &[0.0, 0.3, 3.0, 17.0, 150.0] {
            let m = filon_moments(kappa);
            for k in [0usize, 1, 7, 15] {
                let direct: C64 = x
                    .iter()
                    .zip(&w)
                    .map(|(s, wi)| {
                        let p = legendre_all(PANEL_ORDER, *s)[k];
                        C64::from_polar(wi * p, kappa * s)
                    })
                    .sum();
                if kappa < 100.0 {
                    assert!((m[k] - direct).norm() < 1e-13, "κ={kappa} k={k}");
                }
            }
        }
    }

    #[test]
    fn fresnel_integral_with_gaussian_regularizer() {
        let eps = 1e-2;
        let t = 10.0;
        let r = oscillatory_integral(|l| (-eps * l * l).exp(), Flow::Schrodinger, t, (0.0, 80.0), 1e-12)
            .unwrap();
        let exact = 0.5 * (PI / C64::new(eps, -t)).sqrt();
        assert!((r.value - exact).norm() < 1e-6 * exact.norm(), "{} vs {exact}", r.value);
        let limit = 0.5 * (PI / t).sqrt() * C64::from_polar(1.0, PI / 4.0);
        assert!((exact - limit).norm() < 1e-3 * limit.norm());
    }

    #[test]
    fn zero_time_and_symmetry() {
        let chi = crate::propagator::CutoffSpec::new(1.0, 4).unwrap();
        let r = oscillatory_integral(|l| chi.chi(l), Flow::WaveCos, 0.0, (0.0, 1.0), 1e-12).unwrap();
        // ∫χ = 1/2 + 1/4 by symmetry of the smoothstep.
        assert!((r.value.re - 0.75).abs() < 1e-10, "{}", r.value);
        let f = |l: f64| l * (-l).exp();
        let p = oscillatory_integral(f, Flow::Schrodinger, 3.0, (0.0, 40.0), 1e-12).unwrap();
        let m = oscillatory_integral(f, Flow::Schrodinger, -3.0, (0.0, 40.0), 1e-12).unwrap();
        assert!((p.value - m.value.conj()).norm() < 1e-12);
        let s1 = oscillatory_integral(f, Flow::WaveSin, 3.0, (0.0, 40.0), 1e-12).unwrap();
        let s2 = oscillatory_integral(f, Flow::WaveSin, -3.0, (0.0, 40.0), 1e-12).unwrap();
        assert!((s1.value + s2.value).norm() < 1e-12);
        // ∫₀^∞ sin(tλ) λe^{−λ} dλ = 2t/(1+t²)².
        assert!((s1.value.re - 6.0 / 100.0).abs() < 1e-10, "{}", s1.value);
    }
}
