//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use threshold4d::cli::{self, null_space_checks, remainder_slopes, RunConfig, Timings};
use threshold4d::operator::{Potential, Shape};
use threshold4d::oracle::free_propagator_exact;
use threshold4d::propagator::{CutoffSpec, Flow, ProbePair, Propagator};
use threshold4d::specfun::Sign;
use threshold4d::spectral::{classify, manufacture, Classification, Target};

const NODES: usize = 6;
const NULL_TOL: f64 = 1e-8;
const SEED: u64 = 20240601;
const KINDS: [Target; 3] = [Target::FirstKind, Target::SecondKind, Target::ThirdKind];

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

fn free_propagator() -> Outcome {
    let pairs: Vec<ProbePair> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&r| ProbePair {
            x: [0.0; 4],
            y: [r, 0.0, 0.0, 0.0],
        })
        .collect();
    let start = Instant::now();
    let p = Propagator::new(None, &pairs, CutoffSpec::new(8.0, 4)?, 1e-4)?;
    let mut worst = 0.0_f64;
    for t in [10.0, 100.0] {
        for (pair, v) in pairs.iter().zip(&p.kernel(Flow::Schrodinger, t).values) {
            let exact = free_propagator_exact(t, pair.distance())?;
            worst = worst.max((v - exact).norm() / exact.norm());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst < 1e-3 && secs < 60.0,
        format!("worst relative error {worst:.3e} (< 1e-3), {secs:.2} s (< 60 s)"),
    ))
}

fn expansion_orders() -> Outcome {
    let start = Instant::now();
    let bump = Potential::on_box(Shape::reference_bump(), 1.0, NODES)?;
    let slopes = remainder_slopes(&bump, 1.0)?;
    let secs = start.elapsed().as_secs_f64();
    let expected = [2.0, 2.0, 4.0];
    let ok = slopes.iter().zip(expected).all(|(s, e)| (s - e).abs() <= 0.2) && secs < 300.0;
    Ok((
        ok,
        format!(
            "remainder slopes {:.3}/{:.3}/{:.3} (expected 2/2/4 within 0.2), {secs:.2} s",
            slopes[0], slopes[1], slopes[2]
        ),
    ))
}

fn inverse_expansion() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for target in KINDS {
        let m = manufacture(target, NODES, NULL_TOL)?;
        let (mut fine, mut jn, mut monotone) = (0.0_f64, 0.0_f64, true);
        for sign in [Sign::Plus, Sign::Minus] {
            let errs: Vec<f64> = [1e-2, 3e-3, 1e-3]
                .iter()
                .map(|&l| cli::expansion_errors(&m.spectral, sign, l))
                .collect::<threshold4d::Result<Vec<_>>>()?
                .into_iter()
                .map(|r| {
                    if r.lambda == 1e-2 {
                        jn = jn.max(r.factored_error);
                    }
                    r.expansion_error
                })
                .collect();
            monotone &= errs.windows(2).all(|w| w[1] < w[0]);
            fine = fine.max(errs[2]);
        }
        ok &= fine < 0.05 && monotone && jn < 1e-8;
        parts.push(format!(
            "{target:?}: err(1e-3) {fine:.2e}, decreasing {monotone}, factored {jn:.1e}"
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn classification_integrity() -> Outcome {
    let mut ok = true;
    let mut failed = Vec::new();
    let mut count = 0;
    let regular = classify(&Potential::on_box(Shape::reference_bump(), 0.01, NODES)?, NULL_TOL)?;
    let mut runs = vec![("Regular".to_string(), regular, Classification::Regular)];
    for target in KINDS {
        let m = manufacture(target, NODES, NULL_TOL)?;
        runs.push((format!("{target:?}"), m.spectral, target.classification()));
    }
    for (label, s, expected) in &runs {
        let (_, checks) = null_space_checks(s, "")?;
        count += checks.len() + 1;
        if s.classification != *expected {
            ok = false;
            failed.push(format!("{label} classified as {}", s.classification));
        }
        for c in checks.iter().filter(|c| !c.passed) {
            ok = false;
            failed.push(format!("{label} {}", c.line()));
        }
    }
    let detail = if failed.is_empty() {
        format!("{count} invariants over {} runs", runs.len())
    } else {
        failed.join("; ")
    };
    Ok((ok, detail))
}

fn decay_report(target: Target) -> Result<cli::RunReport, Box<dyn std::error::Error>> {
    let mut cfg = RunConfig::default();
    cfg.potential.target = Some(target);
    cfg.grid.nodes_per_dim = NODES;
    Ok(cli::cmd_decay(&cfg, &mut Timings::default())?)
}

fn summarize(report: &cli::RunReport, label: &str, keep: impl Fn(&str) -> bool) -> (bool, Vec<String>) {
    let mut ok = true;
    let mut parts = Vec::new();
    for c in report.checks.iter().filter(|c| keep(&c.name)) {
        ok &= c.passed;
        parts.push(format!("{label} {}", c.line()));
    }
    (ok, parts)
}

fn is_wave(name: &str) -> bool {
    name.starts_with("wave_")
}

fn decay_laws(reports: &[(Target, cli::RunReport)]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (target, report) in reports {
        let (pass, lines) = summarize(report, &format!("{target:?}"), |n| !is_wave(n));
        ok &= pass && !lines.is_empty();
        parts.extend(lines);
    }
    Ok((ok, parts.join("; ")))
}

fn wave_flows(reports: &[(Target, cli::RunReport)]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (target, report) in reports.iter().filter(|(t, _)| *t != Target::ThirdKind) {
        let (pass, lines) = summarize(report, &format!("{target:?}"), is_wave);
        ok &= pass && !lines.is_empty();
        parts.extend(lines);
    }
    Ok((ok, parts.join("; ")))
}

fn random_identities() -> Outcome {
    let (feshbach, lemma) = cli::random_identity_errors(SEED, 100)?;
    Ok((
        feshbach < 1e-12 && lemma < 1e-12,
        format!("100 trials: block inverse {feshbach:.2e}, near-kernel lemma {lemma:.2e} (< 1e-12)"),
    ))
}

fn run_verify(dir: &Path) -> Result<i32, Box<dyn std::error::Error>> {
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_threshold4d"))
        .args(["verify", "--seed", &SEED.to_string(), "--out"])
        .arg(dir)
        .stdout(std::process::Stdio::null())
        .status()?;
    Ok(status.code().unwrap_or(-1))
}

fn determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir()?, tempfile::tempdir()?);
    let codes = (run_verify(a.path())?, run_verify(b.path())?);
    let mut names: Vec<_> = std::fs::read_dir(a.path())?
        .map(|e| e.map(|e| e.file_name()))
        .collect::<Result<_, _>>()?;
    names.retain(|n| n != "timings.json");
    names.sort();
    let mut differing = Vec::new();
    for name in &names {
        if std::fs::read(a.path().join(name))? != std::fs::read(b.path().join(name)).unwrap_or_default() {
            differing.push(name.to_string_lossy().into_owned());
        }
    }
    let ok = codes.0 == codes.1 && differing.is_empty() && !names.is_empty();
    Ok((
        ok,
        format!(
            "{} files compared, exit codes {}/{}, differing: [{}]",
            names.len(),
            codes.0,
            codes.1,
            differing.join(", ")
        ),
    ))
}

fn report(name: &str, outcome: Outcome) -> bool {
    match outcome {
        Ok((ok, detail)) => {
            println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
            ok
        }
        Err(e) => {
            println!("FAIL {name}: error {e}");
            false
        }
    }
}

fn main() -> ExitCode {
    let mut all = true;
    all &= report("free_propagator", free_propagator());
    all &= report("expansion_orders", expansion_orders());
    all &= report("inverse_expansion", inverse_expansion());
    all &= report("classification_integrity", classification_integrity());
    let reports: Result<Vec<_>, _> = KINDS.iter().map(|&k| decay_report(k).map(|r| (k, r))).collect();
    match reports {
        Ok(reports) => {
            all &= report("decay_laws", decay_laws(&reports));
            all &= report("wave_flows", wave_flows(&reports));
        }
        Err(e) => {
            all &= report("decay_laws", Err(e.to_string().into()));
            all &= report("wave_flows", Err(e));
        }
    }
    all &= report("random_identities", random_identities());
    all &= report("determinism", determinism());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
