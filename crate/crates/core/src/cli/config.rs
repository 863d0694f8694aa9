//! Run configuration: a versioned TOML document validated before any computation.

use super::CliError;
use crate::operator::{Parity, Shape};
use crate::propagator::{default_probes, CutoffSpec, ProbePair, DEFAULT_QUAD_TOL};
use crate::spectral::{Target, DEFAULT_NULL_TOL};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub cutoff: CutoffConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub times: TimeGrid,
    #[serde(default)]
    pub probes: ProbeSpec,
    #[serde(default)]
    pub expansion: ExpansionSweep,
    /// Not echoed into reports, so that results do not depend on where they are written.
    #[serde(default, skip_serializing)]
    pub output: OutputSpec,
    #[serde(default)]
    pub faults: Faults,
}

/// Either a fixed coupling or the keyword `"tune"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coupling {
    Value(f64),
    Keyword(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    /// Manufactured potential of a given kind; replaces `shape` and `coupling`.
    pub target: Option<Target>,
    #[serde(default = "Shape::reference_bump")]
    pub shape: Shape,
    #[serde(default = "default_coupling")]
    pub coupling: Coupling,
    /// Sector for tuning, per axis: 1 even, −1 odd, 0 free.
    #[serde(default = "default_parity")]
    pub parity: [i8; 4],
    #[serde(default = "default_bracket")]
    pub bracket: [f64; 2],
}

fn default_coupling() -> Coupling {
    Coupling::Value(1.0)
}

fn default_parity() -> [i8; 4] {
    [1; 4]
}

fn default_bracket() -> [f64; 2] {
    [1.0, 100.0]
}

impl Default for PotentialSpec {
    fn default() -> Self {
        PotentialSpec {
            target: None,
            shape: Shape::reference_bump(),
            coupling: default_coupling(),
            parity: default_parity(),
            bracket: default_bracket(),
        }
    }
}

impl PotentialSpec {
    pub fn is_tuned(&self) -> bool {
        matches!(&self.coupling, Coupling::Keyword(k) if k == "tune")
    }

    pub fn sector(&self) -> Parity {
        self.parity.map(|p| match p {
            0 => None,
            s => Some(s),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nodes_per_dim: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { nodes_per_dim: 6 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffConfig {
    pub lambda1: f64,
    pub smoothness: u32,
}

impl Default for CutoffConfig {
    fn default() -> Self {
        CutoffConfig {
            lambda1: 2.0,
            smoothness: 4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative threshold for the null space of `T`.
    pub null: f64,
    /// Relative accuracy requested from the oscillatory quadrature.
    pub quad: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            null: DEFAULT_NULL_TOL,
            quad: DEFAULT_QUAD_TOL,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub per_decade: usize,
    pub fit_window: [f64; 2],
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid {
            t_min: 4.0,
            t_max: 1e4,
            per_decade: 16,
            fit_window: [10.0, 1e3],
        }
    }
}

/// Explicit probe pairs `[x, y]`; empty means the built-in set.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    #[serde(default)]
    pub pairs: Vec<[[f64; 4]; 2]>,
}

impl ProbeSpec {
    pub fn resolve(&self) -> Vec<ProbePair> {
        if self.pairs.is_empty() {
            default_probes()
        } else {
            self.pairs.iter().map(|[x, y]| ProbePair { x: *x, y: *y }).collect()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionSweep {
    pub lambdas: Vec<f64>,
}

impl Default for ExpansionSweep {
    fn default() -> Self {
        ExpansionSweep {
            lambdas: vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: PathBuf::from("out") }
    }
}

/// Deliberate corruption used to check that the invariant suite notices.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Faults {
    /// Factor applied to the log coefficient `a₁` in the order checks.
    pub a1_scale: f64,
}

impl Default for Faults {
    fn default() -> Self {
        Faults { a1_scale: 1.0 }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            potential: PotentialSpec::default(),
            grid: GridSpec::default(),
            cutoff: CutoffConfig::default(),
            tolerances: Tolerances::default(),
            times: TimeGrid::default(),
            probes: ProbeSpec::default(),
            expansion: ExpansionSweep::default(),
            output: OutputSpec::default(),
            faults: Faults::default(),
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {x}")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let p = &self.potential;
        match &p.coupling {
            Coupling::Value(g) if !g.is_finite() => return Err(invalid(format!("coupling {g} is not finite"))),
            Coupling::Keyword(k) if k != "tune" => {
                return Err(invalid(format!("coupling must be a number or \"tune\", got \"{k}\"")))
            }
            _ => {}
        }
        if p.parity.iter().any(|s| !matches!(s, -1..=1)) {
            return Err(invalid(format!("parity entries must be 1, -1 or 0, got {:?}", p.parity)));
        }
        let [lo, hi] = p.bracket;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(invalid(format!("bracket [{lo}, {hi}] must satisfy 0 < lo < hi")));
        }
        if self.grid.nodes_per_dim < 2 {
            return Err(invalid("nodes_per_dim must be at least 2"));
        }
        positive("cutoff.lambda1", self.cutoff.lambda1)?;
        if self.cutoff.smoothness == 0 {
            return Err(invalid("cutoff.smoothness must be at least 1"));
        }
        positive("tolerances.null", self.tolerances.null)?;
        positive("tolerances.quad", self.tolerances.quad)?;
        let t = &self.times;
        positive("times.t_min", t.t_min)?;
        if !(t.t_max > t.t_min && t.t_max.is_finite()) {
            return Err(invalid("times.t_max must exceed times.t_min"));
        }
        if t.per_decade == 0 {
            return Err(invalid("times.per_decade must be positive"));
        }
        let [w0, w1] = t.fit_window;
        if !(w0 >= t.t_min && w1 <= t.t_max && w1 > w0) {
            return Err(invalid(format!("fit window [{w0}, {w1}] must lie inside [t_min, t_max]")));
        }
        if self.expansion.lambdas.is_empty() {
            return Err(invalid("expansion.lambdas is empty"));
        }
        for &l in &self.expansion.lambdas {
            if !(l > 0.0 && l < 1.0) {
                return Err(invalid(format!("expansion λ = {l} outside (0, 1)")));
            }
        }
        positive("faults.a1_scale", self.faults.a1_scale)?;
        Ok(())
    }

    /// Apply `key=value` pairs separated by commas, e.g. `null=1e-9,quad=1e-5`.
    pub fn apply_tol_overrides(&mut self, spec: &str) -> Result<(), CliError> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| invalid(format!("tolerance override \"{item}\" is not key=value")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| invalid(format!("tolerance override \"{item}\" has a bad number")))?;
            match key.trim() {
                "null" => self.tolerances.null = value,
                "quad" => self.tolerances.quad = value,
                other => return Err(invalid(format!("unknown tolerance \"{other}\" (expected null or quad)"))),
            }
        }
        self.validate()
    }

    pub fn cutoff_spec(&self) -> Result<CutoffSpec, CliError> {
        Ok(CutoffSpec::new(self.cutoff.lambda1, self.cutoff.smoothness)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_takes_defaults() {
        let cfg = RunConfig::from_toml("schema_version = 1\n").unwrap();
        assert_eq!(cfg.grid.nodes_per_dim, 6);
        assert_eq!(cfg.potential.shape, Shape::reference_bump());
        assert!(!cfg.potential.is_tuned());
    }

    #[test]
    fn full_document_round_trips() {
        let text = r#"
schema_version = 1
seed = 3

[potential]
shape = { kind = "bump", semi_axes = [1.0, 1.0, 1.0, 1.0], tilt = [0.0, 0.0, 0.0, 0.0] }
coupling = "tune"
parity = [-1, 1, 1, 1]
bracket = [20.0, 200.0]

[grid]
nodes_per_dim = 5

[tolerances]
null = 1e-9
quad = 1e-5
"#;
        let cfg = RunConfig::from_toml(text).unwrap();
        assert!(cfg.potential.is_tuned());
        assert_eq!(cfg.potential.sector(), [Some(-1), Some(1), Some(1), Some(1)]);
        let again = RunConfig::from_toml(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(again.potential.bracket, [20.0, 200.0]);
    }

    #[test]
    fn schema_violations_are_rejected() {
        for text in [
            "schema_version = 2\n",
            "schema_version = 1\n[tolerances]\nnull = -1.0\nquad = 1e-4\n",
            "schema_version = 1\n[potential]\ncoupling = \"deep\"\n",
            "schema_version = 1\nunknown = 1\n",
            "schema_version = 1\n[times]\nt_min = 10.0\nt_max = 1.0\nper_decade = 4\nfit_window = [1.0, 2.0]\n",
        ] {
            assert!(matches!(RunConfig::from_toml(text), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn tolerance_overrides() {
        let mut cfg = RunConfig::default();
        cfg.apply_tol_overrides("null=1e-9, quad=2e-5").unwrap();
        assert_eq!(cfg.tolerances.null, 1e-9);
        assert_eq!(cfg.tolerances.quad, 2e-5);
        assert!(cfg.clone().apply_tol_overrides("gap=1").is_err());
        assert!(cfg.apply_tol_overrides("null=0").is_err());
    }
}
