//! Low-energy evolutions through the Stone formula.
//!
//! With `dE(λ²) = (πi)⁻¹ λ (R_V⁺ − R_V⁻)(λ²) dλ`,
//!
//! ```text
//! e^{itH}χ(H)P_ac         = ∫ e^{itλ²} λχ(λ) (R_V⁺ − R_V⁻) dλ / (πi)
//! cos(t√H)χ(H)P_ac        = ∫ cos(tλ)  λχ(λ) (R_V⁺ − R_V⁻) dλ / (πi)
//! sin(t√H)/√H·χ(H)P_ac    = ∫ sin(tλ)   χ(λ) (R_V⁺ − R_V⁻) dλ / (πi)
//! ```
//!
//! When `M⁻¹` carries a resonance term `f₁·S`, its contribution
//! `F_t = −(πi)⁻¹ (G₀VG₀vζ)(x)(G₀VG₀vζ)(y) ∫ w(t, λ) (f₁⁺ − f₁⁻) dλ` is
//! available separately so it can be subtracted from the kernels.

mod cutoff;
mod filon;
mod fit;
mod probes;
mod resolvent;
mod table;

pub use cutoff::CutoffSpec;
pub use filon::{
    filon_moments, filon_panel, oscillatory_integral, spherical_bessel_j, Flow, OscillatoryResult,
    LAMBDA_MIN, PANEL_ORDER,
};
pub use fit::{decay_fit, fit_series, log_times, DecayFit, DecayModel};
pub use probes::{default_probes, ProbePair};
pub use resolvent::{
    perturbed_resolvent_kernel, stone_integrand, LambdaSlice, PairValue, PointData,
    ResolventContext,
};
pub use table::{AmplitudeTable, TableStats};

use crate::linalg::{self, RMat};
use crate::operator::{assemble_kernel, dist, G0Kernel};
use crate::spectral::{expansion, ResonanceTerm, SpectralData};
use crate::{Error, Result, C64};
use ndarray::Array1;
use serde::Serialize;
use std::f64::consts::PI;

/// Default relative accuracy requested from the λ-integrals.
pub const DEFAULT_QUAD_TOL: f64 = 1e-4;

/// Kernel values of one flow at one time.
#[derive(Debug, Clone, Serialize)]
pub struct PropagatorSample {
    pub t: f64,
    pub flow: Flow,
    pub pairs: Vec<ProbePair>,
    pub values: Vec<C64>,
    /// `max |kernel|` over the probe pairs.
    pub sup_proxy: f64,
    /// Largest absolute quadrature error estimate over the pairs.
    pub error: f64,
    /// Set when the error estimate exceeds the requested tolerance relative to `sup_proxy`.
    pub flagged: bool,
}

impl PropagatorSample {
    fn new(t: f64, flow: Flow, pairs: &[ProbePair], values: Vec<C64>, error: f64, tol: f64) -> PropagatorSample {
        let sup_proxy = values.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        PropagatorSample {
            t,
            flow,
            pairs: pairs.to_vec(),
            values,
            sup_proxy,
            error,
            flagged: error > tol * sup_proxy,
        }
    }

    /// Pairwise difference `self − other` on the same probes.
    pub fn minus(&self, other: &PropagatorSample) -> PropagatorSample {
        let values: Vec<C64> = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        let sup_proxy = values.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        let error = self.error + other.error;
        PropagatorSample {
            t: self.t,
            flow: self.flow,
            pairs: self.pairs.clone(),
            values,
            sup_proxy,
            error,
            flagged: self.flagged || other.flagged,
        }
    }
}

/// `G₀VG₀vζ` at arbitrary points, the profile of the finite-rank term.
fn resonance_profile(spectral: &SpectralData, zeta: &Array1<f64>) -> Result<(Array1<f64>, RMat)> {
    let p = &spectral.potential;
    let g0 = assemble_kernel(&G0Kernel, &p.grid)?;
    let vz = Array1::from_shape_fn(p.len(), |i| p.v[i] * zeta[i]);
    let inner = g0.dot(&vz);
    let charge = Array1::from_shape_fn(p.len(), |i| p.samples[i] * inner[i]);
    let on_grid = g0.dot(&charge);
    let operator = on_grid
        .view()
        .insert_axis(ndarray::Axis(1))
        .dot(&on_grid.view().insert_axis(ndarray::Axis(0)));
    Ok((charge, operator))
}

fn profile_at(spectral: &SpectralData, charge: &Array1<f64>, x: &[f64; 4]) -> f64 {
    let p = &spectral.potential;
    p.grid
        .nodes
        .iter()
        .zip(&p.grid.weights)
        .zip(charge)
        .map(|((y, w), q)| w.sqrt() * q / (4.0 * PI * PI * dist(x, y).powi(2)))
        .sum()
}

/// The finite-rank correction of one flow at time `t`.
#[derive(Debug, Clone)]
pub struct FiniteRankCorrection {
    /// `∫ w(t, λ)(f₁⁺ − f₁⁻) dλ` with the flow's weight.
    pub phi: C64,
    /// `K = G₀VG₀vSvG₀VG₀` on the support grid, symmetric basis.
    pub operator: RMat,
    pub rank: usize,
}

struct Correction {
    table: AmplitudeTable,
    /// `g(x)·g(y)` per pair.
    weights: Vec<f64>,
    operator: RMat,
}

/// Tabulated kernels of all three flows at a fixed probe set.
pub struct Propagator {
    pub pairs: Vec<ProbePair>,
    pub cutoff: CutoffSpec,
    pub tol: f64,
    table: AmplitudeTable,
    correction: Option<Correction>,
    pub resonance: Option<ResonanceTerm>,
}

impl Propagator {
    /// `spectral = None` gives the free evolutions.
    pub fn new(
        spectral: Option<&SpectralData>,
        pairs: &[ProbePair],
        cutoff: CutoffSpec,
        tol: f64,
    ) -> Result<Propagator> {
        if pairs.is_empty() {
            return Err(Error::Domain {
                op: "Propagator::new",
                detail: "empty probe set".into(),
            });
        }
        let ctx = ResolventContext::new(spectral)?;
        let table = AmplitudeTable::kernels(&ctx, pairs, cutoff, 1e-3 * tol)?;
        let resonance = match ctx.spectral() {
            Some(s) => expansion(s)?.resonance,
            None => None,
        };
        let correction = match (&resonance, ctx.spectral()) {
            (Some(res), Some(s)) => {
                let (charge, operator) = resonance_profile(s, &res.zeta)?;
                let weights = pairs
                    .iter()
                    .map(|p| profile_at(s, &charge, &p.x) * profile_at(s, &charge, &p.y))
                    .collect();
                Some(Correction {
                    table: AmplitudeTable::resonance(res, cutoff, 1e-3 * tol)?,
                    weights,
                    operator,
                })
            }
            _ => None,
        };
        Ok(Propagator {
            pairs: pairs.to_vec(),
            cutoff,
            tol,
            table,
            correction,
            resonance,
        })
    }

    pub fn stats(&self) -> &TableStats {
        &self.table.stats
    }

    pub fn has_correction(&self) -> bool {
        self.correction.is_some()
    }

    pub fn kernel(&self, flow: Flow, t: f64) -> PropagatorSample {
        let (values, errors) = self.table.integrate(flow, t);
        let error = errors.iter().fold(0.0_f64, |m, e| m.max(*e));
        PropagatorSample::new(t, flow, &self.pairs, values, error, self.tol)
    }

    /// `F_t` at the probe pairs, or `None` when there is no resonance term.
    pub fn correction(&self, flow: Flow, t: f64) -> Option<PropagatorSample> {
        let c = self.correction.as_ref()?;
        let (phi, err) = c.table.integrate(flow, t);
        let values = c.weights.iter().map(|w| phi[0] * (-2.0 * w / PI)).collect();
        let scale = c.weights.iter().fold(0.0_f64, |m, w| m.max(w.abs()));
        Some(PropagatorSample::new(t, flow, &self.pairs, values, 2.0 * scale * err[0] / PI, self.tol))
    }

    /// `φ(t)` and `K` of the finite-rank term.
    pub fn finite_rank(&self, flow: Flow, t: f64) -> Option<Result<FiniteRankCorrection>> {
        let c = self.correction.as_ref()?;
        let (phi, _) = c.table.integrate(flow, t);
        Some(linalg::numerical_rank(&c.operator, 1e-10).map(|rank| FiniteRankCorrection {
            phi: phi[0] * C64::new(0.0, 2.0),
            operator: c.operator.clone(),
            rank,
        }))
    }

    /// Kernel minus `F_t`; the kernel itself when there is no correction.
    pub fn residual(&self, flow: Flow, t: f64) -> PropagatorSample {
        let k = self.kernel(flow, t);
        match self.correction(flow, t) {
            Some(f) => k.minus(&f),
            None => k,
        }
    }
}

/// Kernel of `e^{itH}χ(H)P_ac` at the probe pairs.
pub fn schrodinger_kernel(
    t: f64,
    probes: &[ProbePair],
    spectral: Option<&SpectralData>,
    cutoff: CutoffSpec,
) -> Result<PropagatorSample> {
    Ok(Propagator::new(spectral, probes, cutoff, DEFAULT_QUAD_TOL)?.kernel(Flow::Schrodinger, t))
}

/// Kernels of `cos(t√H)χ(H)P_ac` and `sin(t√H)/√H·χ(H)P_ac`.
pub fn wave_kernels(
    t: f64,
    probes: &[ProbePair],
    spectral: Option<&SpectralData>,
    cutoff: CutoffSpec,
) -> Result<(PropagatorSample, PropagatorSample)> {
    let p = Propagator::new(spectral, probes, cutoff, DEFAULT_QUAD_TOL)?;
    Ok((p.kernel(Flow::WaveCos, t), p.kernel(Flow::WaveSin, t)))
}

/// `φ(t)` and the operator of the finite-rank term of `flow`.
pub fn finite_rank_correction(
    t: f64,
    spectral: &SpectralData,
    cutoff: CutoffSpec,
    flow: Flow,
) -> Result<FiniteRankCorrection> {
    let res = expansion(spectral)?.resonance.ok_or(Error::WrongKind {
        expected: "FirstKind or ThirdKind",
        found: spectral.classification.name(),
    })?;
    let table = AmplitudeTable::resonance(&res, cutoff, 1e-3 * DEFAULT_QUAD_TOL)?;
    let (phi, _) = table.integrate(flow, t);
    let (_, operator) = resonance_profile(spectral, &res.zeta)?;
    let rank = linalg::numerical_rank(&operator, 1e-10)?;
    Ok(FiniteRankCorrection {
        phi: phi[0] * C64::new(0.0, 2.0),
        operator,
        rank,
    })
}
