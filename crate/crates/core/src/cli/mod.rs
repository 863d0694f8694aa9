//! Batch front end.
//!
//! ```text
//! threshold4d <classify|tune|decay|verify|expand> [--config PATH] [--out DIR]
//!             [--seed N] [--tol-overrides null=1e-9,quad=1e-5]
//! ```
//!
//! Each run writes `<command>.json`, `checks.csv`, the command's tables and a
//! separate `timings.json` into the output directory. Exit codes: 0 all checks
//! pass, 1 an invariant failed, 2 configuration or I/O error, 3 numerical failure.

mod commands;
mod config;
mod report;
mod verify;

pub use commands::{
    cmd_classify, cmd_decay, cmd_expand, cmd_tune, expansion_checks, expansion_errors,
    null_space_checks, prepare, Prepared,
};
pub use config::{
    Coupling, CutoffConfig, ExpansionSweep, Faults, GridSpec, OutputSpec, PotentialSpec, ProbeSpec,
    RunConfig, TimeGrid, Tolerances, SCHEMA_VERSION,
};
pub use report::{
    Check, ClassificationReport, DecayReport, DecayRow, ExpansionRow, FitReport, NullVectorReport,
    RunReport, Timings, TuneReport,
};
pub use verify::{cmd_verify, random_identity_errors, remainder_slopes, ORACLE_NODES, RANDOM_TRIALS};

use clap::{Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Numerical(#[from] crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "threshold4d", version, about = "Zero-energy threshold classification and decay for -Δ + V in four dimensions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Random seed (overrides `seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Comma-separated `key=value` tolerance overrides, keys `null` and `quad`.
    #[arg(long = "tol-overrides", global = true)]
    pub tol_overrides: Option<String>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Classify the zero-energy obstruction of the configured potential.
    Classify,
    /// Find the coupling at which the configured shape develops a zero-energy state.
    Tune,
    /// Sweep the propagator kernels over time and fit their decay.
    Decay,
    /// Run the invariant suite.
    Verify,
    /// Compare the low-energy expansion of `M(λ)⁻¹` with the dense inverse.
    Expand,
}

impl Cli {
    pub fn resolve_config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        if let Some(spec) = &self.tol_overrides {
            cfg.apply_tol_overrides(spec)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn execute(command: Command, cfg: &RunConfig, timings: &mut Timings) -> Result<RunReport, CliError> {
    match command {
        Command::Classify => cmd_classify(cfg, timings),
        Command::Tune => cmd_tune(cfg, timings),
        Command::Decay => cmd_decay(cfg, timings),
        Command::Verify => cmd_verify(cfg, timings),
        Command::Expand => cmd_expand(cfg, timings),
    }
}

/// Parse arguments, run, write outputs, print one line per check; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cfg = match cli.resolve_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let mut timings = Timings::default();
    let report = match execute(cli.command, &cfg, &mut timings) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let dir = &cfg.output.dir;
    if let Err(e) = report.write(dir).and_then(|_| timings.write(dir)) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let mut out = std::io::stdout().lock();
    if let Some(c) = &report.classification {
        let _ = writeln!(
            out,
            "{}, rank S1 = {}, rank S2 = {} (g = {:.6})",
            c.classification, c.rank_s1, c.rank_s2, c.coupling
        );
    }
    for c in &report.checks {
        let _ = writeln!(out, "{}", c.line());
    }
    if report.passed() {
        0
    } else {
        1
    }
}
