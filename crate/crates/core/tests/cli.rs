use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_threshold4d"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, format!("schema_version = 1\n{body}")).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn small_coupling_classifies_regular() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[potential]\ncoupling = 0.01\n[grid]\nnodes_per_dim = 5\n");
    let out = run(&["classify", "--config", &cfg], &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("Regular"), "{stdout}");
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("out/classify.json")).unwrap()).unwrap();
    assert_eq!(json["classification"]["rank_s1"], 0);
    assert!(dir.path().join("out/checks.csv").exists());
    assert!(dir.path().join("out/timings.json").exists());
}

#[test]
fn missing_config_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["classify", "--config", "/nonexistent/run.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_values_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for body in [
        "[tolerances]\nnull = -1.0\n",
        "[grid]\nnodes_per_dim = 1\n",
        "unknown_key = 3\n",
        "[cutoff]\nlambda1 = 0.0\n",
        "[times]\nfit_window = [100.0, 10.0]\n",
    ] {
        let cfg = write_config(dir.path(), body);
        let out = run(&["classify", "--config", &cfg], &dir.path().join("out"));
        assert_eq!(out.status.code(), Some(2), "{body}");
    }
    let out = run(&["classify", "--tol-overrides", "quad=abc"], &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn perturbed_constant_fails_the_order_checks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[faults]\na1_scale = 1.5\n");
    let out = run(&["verify", "--config", &cfg], &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL mexp1.remainder_slope"), "{stdout}");
    assert!(stdout.contains("FAIL mexp2.remainder_slope"), "{stdout}");
}

#[test]
fn coarse_grid_warns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[grid]\nnodes_per_dim = 4\n");
    let out = run(&["verify", "--config", &cfg], &dir.path().join("out"));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("warning: nodes_per_dim = 4"), "{stderr}");
}
