//! Tabulated Stone amplitudes on adaptive λ-panels, reusable for every `t`.
//!
//! For each probe pair the real amplitude `A(λ) = λχ(λ)(R_V⁺ − R_V⁻)/(πi)`
//! is sampled at Gauss–Legendre nodes. A panel is kept once the highest
//! Legendre coefficients of every channel fall below the tolerance; the
//! flows are then
//!
//! ```text
//! e^{itH}:        ∫ e^{itλ²} A dλ
//! cos(t√H):       ∫ cos(tλ) A dλ
//! sin(t√H)/√H:    ∫ sin(tλ) A/λ dλ
//! ```
//!
//! On `[0, λ_min]` the amplitude is replaced by a model: `C/(λ|a log λ + z|²)`
//! when a resonance is present, `∝ λ` otherwise.

use super::filon::{filon_panel, initial_panels, legendre_tail, panel_rule, PanelRule, LAMBDA_MIN};
use super::resolvent::ResolventContext;
use super::{CutoffSpec, Flow, ProbePair};
use crate::spectral::ResonanceTerm;
use crate::{Error, Result, C64};
use serde::Serialize;
use std::f64::consts::PI;

struct Panel {
    lo: f64,
    hi: f64,
    /// λ-Legendre coefficients of `A` per channel.
    amp: Vec<Vec<f64>>,
    /// Same for `A/λ`.
    amp_over: Vec<Vec<f64>>,
    /// Legendre coefficients in `u = λ²` of `A/(2λ)`.
    amp_u: Vec<Vec<f64>>,
}

/// Quadrature statistics of a table.
#[derive(Debug, Clone, Serialize)]
pub struct TableStats {
    pub panels: usize,
    pub evaluations: usize,
    /// Panels accepted at the minimum width without meeting the tolerance.
    pub unresolved: usize,
    pub lambda_min: f64,
}

pub struct AmplitudeTable {
    pub cutoff: CutoffSpec,
    pub tol: f64,
    channels: usize,
    panels: Vec<Panel>,
    /// `∫₀^{λ_min} A dλ` per channel.
    tail: Vec<f64>,
    /// Truncation estimates per channel for `A`, `A/λ` and the `u`-resampling.
    error: [Vec<f64>; 3],
    pub stats: TableStats,
}

/// `∫₀^{λ_min} dλ/(λ|a log λ + z|²)`.
fn resonant_tail_integral(a: f64, z: C64, lambda_min: f64) -> f64 {
    let y = z.im;
    let s = a * lambda_min.ln() + z.re;
    (1.0 / (a * y)) * ((s / y).atan() + 0.5 * PI * a.signum() * y.signum())
}

fn resonant_denominator(a: f64, z: C64, lambda: f64) -> f64 {
    (a * lambda.ln() + z).norm_sqr()
}

impl AmplitudeTable {
    /// Tabulate channels given by `f(λ) -> values`, on `[λ_min, λ₁]`.
    ///
    /// `tails` maps the values at `λ_min` to the integrals over `[0, λ_min]`.
    fn build<F, T>(cutoff: CutoffSpec, tol: f64, channels: usize, f: F, tails: T) -> Result<AmplitudeTable>
    where
        F: Fn(f64) -> Result<Vec<f64>>,
        T: Fn(&[f64]) -> Vec<f64>,
    {
        if !(tol > 0.0) {
            return Err(Error::Domain {
                op: "AmplitudeTable::build",
                detail: format!("tol = {tol}"),
            });
        }
        let rule = panel_rule();
        let [half, lambda1] = cutoff.breakpoints();
        let mut evaluations = 0;
        let sample = |lo: f64, hi: f64, evaluations: &mut usize| -> Result<Vec<Vec<f64>>> {
            let (mid, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            let mut values = vec![vec![0.0; rule.nodes.len()]; channels];
            for (i, s) in rule.nodes.iter().enumerate() {
                let l = mid + h * s;
                let row = f(l)?;
                *evaluations += 1;
                for (c, v) in row.into_iter().enumerate() {
                    if !v.is_finite() {
                        return Err(Error::Quadrature(format!("non-finite amplitude at λ = {l}")));
                    }
                    values[c][i] = v;
                }
            }
            Ok(values)
        };
        // First pass on the coarse panels fixes the size of each channel's integral,
        // so that panels whose contribution is negligible are not refined into noise.
        let mut stack = Vec::new();
        for (lo, hi) in initial_panels(LAMBDA_MIN, half).into_iter().chain([(half, lambda1)]) {
            stack.push((lo, hi, Some(sample(lo, hi, &mut evaluations)?)));
        }
        let mut mass = vec![0.0; channels];
        for (lo, hi, values) in &stack {
            let h = 0.5 * (hi - lo);
            for (c, v) in values.as_ref().into_iter().flatten().enumerate() {
                mass[c] += h * rule.coefficients(&v.iter().map(|x| x.abs()).collect::<Vec<_>>())[0] * 2.0;
            }
        }
        let mut panels = Vec::new();
        let mut error = [vec![0.0; channels], vec![0.0; channels], vec![0.0; channels]];
        let mut unresolved = 0;
        while let Some((lo, hi, pre)) = stack.pop() {
            let mid = 0.5 * (lo + hi);
            let h = 0.5 * (hi - lo);
            let lambdas: Vec<f64> = rule.nodes.iter().map(|s| mid + h * s).collect();
            let values = match pre {
                Some(v) => v,
                None => sample(lo, hi, &mut evaluations)?,
            };
            let amp: Vec<Vec<f64>> = values.iter().map(|v| rule.coefficients(v)).collect();
            let tails: Vec<f64> = amp.iter().map(|c| legendre_tail(c)).collect();
            let resolved = amp.iter().zip(&tails).zip(&mass).all(|((c, &t), &m)| {
                let scale = c.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
                t <= tol * scale || 2.0 * h * t <= 1e-2 * tol * m
            });
            let narrow = h < 1e-2 * lo;
            if !resolved && !narrow {
                stack.push((lo, mid, None));
                stack.push((mid, hi, None));
                continue;
            }
            if !resolved {
                unresolved += 1;
            }
            let amp_over: Vec<Vec<f64>> = values
                .iter()
                .map(|v| {
                    let w: Vec<f64> = v.iter().zip(&lambdas).map(|(a, l)| a / l).collect();
                    rule.coefficients(&w)
                })
                .collect();
            let (ulo, uhi) = (lo * lo, hi * hi);
            let (um, uh) = (0.5 * (ulo + uhi), 0.5 * (uhi - ulo));
            let amp_u: Vec<Vec<f64>> = amp
                .iter()
                .map(|c| {
                    let g: Vec<f64> = rule
                        .nodes
                        .iter()
                        .map(|s| {
                            let l = (um + uh * s).sqrt();
                            PanelRule::evaluate(c, (l - mid) / h) / (2.0 * l)
                        })
                        .collect();
                    rule.coefficients(&g)
                })
                .collect();
            for c in 0..channels {
                error[0][c] += 2.0 * h * tails[c];
                error[1][c] += 2.0 * h * legendre_tail(&amp_over[c]);
                error[2][c] += 2.0 * uh * legendre_tail(&amp_u[c]);
            }
            panels.push(Panel {
                lo,
                hi,
                amp,
                amp_over,
                amp_u,
            });
        }
        panels.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let at_min = f(LAMBDA_MIN)?;
        evaluations += 1;
        let tail = tails(&at_min);
        Ok(AmplitudeTable {
            cutoff,
            tol,
            channels,
            stats: TableStats {
                panels: panels.len(),
                evaluations,
                unresolved,
                lambda_min: LAMBDA_MIN,
            },
            panels,
            tail,
            error,
        })
    }

    /// Stone amplitudes of `R_V` at the probe pairs.
    pub fn kernels(
        ctx: &ResolventContext<'_>,
        pairs: &[ProbePair],
        cutoff: CutoffSpec,
        tol: f64,
    ) -> Result<AmplitudeTable> {
        let limit = ctx.lambda_limit();
        if cutoff.lambda1 > limit {
            return Err(Error::Unresolved {
                lambda: cutoff.lambda1,
                limit,
            });
        }
        let resonance = match ctx.spectral() {
            Some(s) => crate::spectral::expansion(s)?.resonance,
            None => None,
        };
        let amplitude = |lambda: f64| -> Result<Vec<f64>> {
            let chi = cutoff.chi(lambda);
            if chi == 0.0 {
                return Ok(vec![0.0; pairs.len()]);
            }
            let slice = ctx.at(lambda)?;
            pairs
                .iter()
                .map(|p| {
                    let v = slice.pair(&slice.point(&p.x)?, &slice.point(&p.y)?)?;
                    Ok(lambda * chi * v.jump.im / PI)
                })
                .collect()
        };
        let tails = |at_min: &[f64]| -> Vec<f64> {
            at_min
                .iter()
                .map(|&a| match &resonance {
                    Some(r) => {
                        let c = a * LAMBDA_MIN * resonant_denominator(r.a, r.z, LAMBDA_MIN);
                        c * resonant_tail_integral(r.a, r.z, LAMBDA_MIN)
                    }
                    None => 0.5 * a * LAMBDA_MIN,
                })
                .collect()
        };
        Self::build(cutoff, tol, pairs.len(), amplitude, tails)
    }

    /// The scalar `λχ(λ)·Im f₁⁺(λ)` of a resonance term; its tail is exact.
    pub fn resonance(res: &ResonanceTerm, cutoff: CutoffSpec, tol: f64) -> Result<AmplitudeTable> {
        let amplitude =
            |lambda: f64| -> Result<Vec<f64>> { Ok(vec![lambda * cutoff.chi(lambda) * res.f(crate::specfun::Sign::Plus, lambda).im]) };
        let tails = |_: &[f64]| vec![-res.z.im * resonant_tail_integral(res.a, res.z, LAMBDA_MIN)];
        Self::build(cutoff, tol, 1, amplitude, tails)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Flow integrals of every channel at time `t`, with error estimates.
    pub fn integrate(&self, flow: Flow, t: f64) -> (Vec<C64>, Vec<f64>) {
        let mut out = vec![C64::new(0.0, 0.0); self.channels];
        for p in &self.panels {
            let mid = 0.5 * (p.lo + p.hi);
            let h = 0.5 * (p.hi - p.lo);
            for (c, o) in out.iter_mut().enumerate() {
                *o += match flow {
                    Flow::Schrodinger => {
                        let (ulo, uhi) = (p.lo * p.lo, p.hi * p.hi);
                        filon_panel(&p.amp_u[c], 0.5 * (ulo + uhi), 0.5 * (uhi - ulo), t)
                    }
                    Flow::WaveCos => C64::new(filon_panel(&p.amp[c], mid, h, t).re, 0.0),
                    Flow::WaveSin => C64::new(filon_panel(&p.amp_over[c], mid, h, t).im, 0.0),
                };
            }
        }
        for (o, tail) in out.iter_mut().zip(&self.tail) {
            *o += match flow {
                Flow::WaveSin => tail * t,
                _ => *tail,
            };
        }
        let err = (0..self.channels)
            .map(|c| match flow {
                Flow::Schrodinger => self.error[0][c] + self.error[2][c],
                Flow::WaveCos => self.error[0][c],
                Flow::WaveSin => self.error[1][c],
            })
            .collect();
        (out, err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resonant_tail_matches_quadrature() {
        let (a, z) = (-0.19, C64::new(0.17, 0.3));
        let lambda_min: f64 = 1e-3;
        // ∫ dλ/(λD) = ∫ ds/|a s + z|² over s = log λ < log λ_min, on dyadic panels.
        let (x, w) = crate::operator::gauss_legendre(40);
        let s1 = lambda_min.ln();
        let panel = |lo: f64, hi: f64| -> f64 {
            x.iter()
                .zip(&w)
                .map(|(xi, wi)| {
                    let s = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xi;
                    0.5 * (hi - lo) * wi / (a * s + z).norm_sqr()
                })
                .sum()
        };
        let mut quad = panel(s1 - 2f64.powi(-10), s1);
        for k in -10..60 {
            quad += panel(s1 - 2f64.powi(k + 1), s1 - 2f64.powi(k));
        }
        let closed = resonant_tail_integral(a, z, lambda_min);
        assert!((closed - quad).abs() < 1e-12 * closed, "{closed} vs {quad}");
    }
}
