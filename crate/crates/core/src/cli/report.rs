//! Reports, invariant checks and their on-disk forms.

use super::config::RunConfig;
use super::CliError;
use crate::propagator::{DecayFit, Flow};
use crate::spectral::{Classification, TuneResult};
use serde::Serialize;
use std::path::Path;
use std::time::Instant;

/// One invariant: `value` must lie in `[lower, upper]` (either side may be open).
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, lower: Option<f64>, upper: Option<f64>) -> Check {
        let passed = value.is_finite()
            && lower.is_none_or(|l| value >= l)
            && upper.is_none_or(|u| value <= u);
        Check {
            name: name.into(),
            value,
            lower,
            upper,
            passed,
        }
    }

    /// `value < limit`.
    pub fn below(name: impl Into<String>, value: f64, limit: f64) -> Check {
        let mut c = Check::new(name, value, None, Some(limit));
        c.passed = value.is_finite() && value < limit;
        c
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Check {
        Check::new(name, value, Some(limit), None)
    }

    pub fn within(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Check {
        Check::new(name, value, Some(target - tol), Some(target + tol))
    }

    /// A yes/no invariant, recorded as 1 or 0 and required to be 1.
    pub fn holds(name: impl Into<String>, ok: bool) -> Check {
        Check::new(name, if ok { 1.0 } else { 0.0 }, Some(1.0), Some(1.0))
    }

    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let bound = match (self.lower, self.upper) {
            (Some(l), Some(u)) if l == u => format!("= {l}"),
            (Some(l), Some(u)) => format!("in [{l:e}, {u:e}]"),
            (Some(l), None) => format!(">= {l:e}"),
            (None, Some(u)) => format!("< {u:e}"),
            (None, None) => String::new(),
        };
        format!("{status} {}: {:.6e} {bound}", self.name, self.value)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NullVectorReport {
    /// `eigen` for vectors in `ran S₂`, `resonance` for the complement in `ran S₁`.
    pub role: &'static str,
    pub index: usize,
    /// `∫ v f`.
    pub charge: f64,
    pub far_field_exponent: f64,
    pub resonance_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub classification: Classification,
    pub coupling: f64,
    pub nodes_per_dim: usize,
    pub support_nodes: usize,
    pub l1_norm: f64,
    pub rank_s1: usize,
    pub rank_s2: usize,
    pub t_norm: f64,
    pub gap_ratio: f64,
    pub null_eigenvalues: Vec<f64>,
    pub null_vectors: Vec<NullVectorReport>,
    pub tune: Option<TuneResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TuneReport {
    pub tune: TuneResult,
    /// Zero crossing of the radial finite-difference operator, for radial shapes.
    pub radial_crossing: Option<f64>,
    pub relative_difference: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionRow {
    pub lambda: f64,
    pub sign: &'static str,
    /// `‖E(λ) − M(λ)⁻¹‖_F / ‖M(λ)⁻¹‖_F` for the expansion `E`.
    pub expansion_error: f64,
    /// Same quantity for the factored inverse.
    pub factored_error: f64,
    pub inverse_norm: f64,
    pub condition: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayRow {
    pub t: f64,
    pub flow: Flow,
    pub kernel_sup: f64,
    pub kernel_error: f64,
    pub correction_sup: Option<f64>,
    pub residual_sup: f64,
    pub phi_abs: Option<f64>,
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub flow: Flow,
    /// `kernel`, `residual` or `correction`.
    pub series: &'static str,
    pub fit: DecayFit,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub has_correction: bool,
    pub correction_rank: Option<usize>,
    pub table_panels: usize,
    pub table_evaluations: usize,
    pub unresolved_panels: usize,
    pub flagged_samples: usize,
    pub max_relative_error: f64,
    pub fits: Vec<FitReport>,
    /// `max/min` of `|φ(t)|·log t` over the fit window.
    pub phi_log_variation: Option<f64>,
    #[serde(skip)]
    pub rows: Vec<DecayRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tune: Option<TuneReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub expansion: Vec<ExpansionRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayReport>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn new(command: &'static str, config: &RunConfig) -> RunReport {
        RunReport {
            schema_version: config.schema_version,
            command,
            config: config.clone(),
            classification: None,
            tune: None,
            expansion: Vec::new(),
            decay: None,
            checks: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Write `<command>.json`, `checks.csv` and the command's tables into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join(format!("{}.json", self.command)), json + "\n")?;
        write_csv(&dir.join("checks.csv"), &self.checks)?;
        if let Some(c) = self.classification.as_ref().filter(|c| !c.null_vectors.is_empty()) {
            write_csv(&dir.join("null_vectors.csv"), &c.null_vectors)?;
        }
        if !self.expansion.is_empty() {
            write_csv(&dir.join("expansion.csv"), &self.expansion)?;
        }
        if let Some(d) = &self.decay {
            write_csv(&dir.join("decay.csv"), &d.rows)?;
            let fits: Vec<FitRow> = d.fits.iter().map(FitRow::from).collect();
            write_csv(&dir.join("fits.csv"), &fits)?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct FitRow {
    flow: Flow,
    series: &'static str,
    model: crate::propagator::DecayModel,
    coefficient: f64,
    exponent: Option<f64>,
    r_squared: f64,
    window_lo: f64,
    window_hi: f64,
    samples: usize,
    max_relative_residual: f64,
}

impl From<&FitReport> for FitRow {
    fn from(r: &FitReport) -> FitRow {
        FitRow {
            flow: r.flow,
            series: r.series,
            model: r.fit.model,
            coefficient: r.fit.coefficient,
            exponent: r.fit.exponent,
            r_squared: r.fit.r_squared,
            window_lo: r.fit.window.0,
            window_hi: r.fit.window.1,
            samples: r.fit.samples,
            max_relative_residual: r.fit.max_relative_residual,
        }
    }
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Wall-clock seconds per stage; kept out of the report so that it stays reproducible.
#[derive(Debug, Default, Serialize)]
pub struct Timings {
    pub stages: Vec<(String, f64)>,
}

impl Timings {
    pub fn time<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.stages.push((label.to_string(), start.elapsed().as_secs_f64()));
        out
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("timings.json"), serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}
