use std::path::Path;
use std::process::{Command, Output};

fn disklab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_disklab"))
        .args(args)
        .current_dir(cwd)
        .env_remove("DISKLAB_OUT")
        .output()
        .unwrap()
}

const FLOW: &str = "name = \"orbit\"\npipeline = \"flow\"\ngenerator = \"neg_z\"\npoints = [[0.5, 0.0]]\nt_grid = [1.0]\ntol = 1e-10\n";

#[test]
fn flow_verb_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("orbit.toml"), FLOW).unwrap();
    let out = disklab(&["flow", "--config", "orbit.toml", "--out", "res"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("res/orbit.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert!((row[3].parse::<f64>().unwrap() - 0.18393972058572117).abs() < 1e-9);
    assert!(dir.path().join("res/orbit.json").exists());
}

#[test]
fn out_dir_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("orbit.toml"), FLOW).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_disklab"))
        .args(["run", "--config", "orbit.toml"])
        .current_dir(dir.path())
        .env("DISKLAB_OUT", dir.path().join("env"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("env/orbit.csv").exists());
}

#[test]
fn verb_must_match_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("orbit.toml"), FLOW).unwrap();
    let out = disklab(&["norm", "--config", "orbit.toml"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("`flow` scenario"));
}

#[test]
fn config_errors_exit_nonzero_with_location() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "name = \"b\"\npipeline = \"flow\"\ngenerator = 3\n").unwrap();
    let out = disklab(&["run", "--config", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("line 3"),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn smoke_verification_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = disklab(&["verify", "--level", "smoke"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["checks"].as_array().unwrap().len(), 7);
}

#[test]
fn tampered_tolerance_fails_gracefully() {
    let dir = tempfile::tempdir().unwrap();
    let out = disklab(&["verify", "--tol-scale", "1e-6", "--summary", "s.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("[FAIL]  4") && stdout.contains("quadrature did not reach tolerance"),
        "{stdout}"
    );
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], false);
}

#[test]
fn unknown_level_is_rejected() {
    let out = disklab(&["verify", "--level", "medium"], Path::new("."));
    assert_eq!(out.status.code(), Some(2));
}
