use disklab::lab::{emit_plotdata, execute, run_scenario, PlotKind, RunOptions, Scenario};
use disklab::Error;
use std::path::{Path, PathBuf};

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const FLOW: &str = "name = \"orbit\"\npipeline = \"flow\"\ngenerator = \"neg_z\"\npoints = [[0.5, 0.0]]\nt_grid = [1.0]\ntol = 1e-10\n";

#[test]
fn flow_scenario_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "orbit.toml", FLOW);
    let out = dir.path().join("out");
    let (report, files) = run_scenario(
        &cfg,
        &RunOptions {
            out_dir: Some(out.clone()),
            tol: None,
        },
    )
    .unwrap();
    assert_eq!(files.csv, out.join("orbit.csv"));
    let v = report.rows[0][report.column("value_re").unwrap()].as_f64().unwrap();
    assert!((v - 0.5 * (-1f64).exp()).abs() < 1e-9);
    let csv = std::fs::read_to_string(&files.csv).unwrap();
    assert!(csv.starts_with("z_re,z_im,t,value_re,value_im,steps,local_error,status\n"));
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&files.json).unwrap()).unwrap();
    assert_eq!(meta["pipeline"], "flow");
    assert_eq!(meta["tolerance"], 1e-10);
    assert!(meta["conventions"]["area_measure"].as_str().unwrap().contains("Lebesgue"));
    assert!(meta["version"].is_string());
}

#[test]
fn identical_configs_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "name = \"c\"\npipeline = \"continuity\"\ngenerator = \"neg_z\"\nparams = { p = 2.0, s = 1.0, alpha = 0.0 }\nfunctions = [\"e_2\"]\nt_grid = [0.0, 0.01, 0.1]\nangles = 8\ntol = 1e-4\n",
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run_scenario(
        &cfg,
        &RunOptions {
            out_dir: Some(a.clone()),
            tol: None,
        },
    )
    .unwrap();
    run_scenario(
        &cfg,
        &RunOptions {
            out_dir: Some(b.clone()),
            tol: None,
        },
    )
    .unwrap();
    for f in ["c.csv", "c.curve.dat"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn tolerance_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "orbit.toml", FLOW);
    let (report, _) = run_scenario(
        &cfg,
        &RunOptions {
            out_dir: Some(dir.path().into()),
            tol: Some(1e-8),
        },
    )
    .unwrap();
    assert_eq!(report.scenario.tol, 1e-8);
    let bad = run_scenario(
        &cfg,
        &RunOptions {
            out_dir: Some(dir.path().into()),
            tol: Some(-1.0),
        },
    );
    assert!(matches!(bad, Err(Error::Config { ref field, .. }) if field == "tol"));
}

#[test]
fn bloch_profile_plotdata() {
    let sc = Scenario::from_toml(
        "name = \"b\"\npipeline = \"bloch-check\"\ngenerator = \"parabolic\"\nradii = [0.99, 0.9]\n",
        ".",
    )
    .unwrap();
    let report = execute(&sc).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.dat");
    emit_plotdata(&report, PlotKind::Profile, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let header: Vec<&str> = text.lines().filter(|l| l.starts_with('#')).collect();
    assert_eq!(header.len(), 4);
    assert!(header.iter().any(|l| l.starts_with("# quantity:")));
    assert!(header.iter().any(|l| l.starts_with("# units:")));
    let rows: Vec<(f64, f64)> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let mut it = l.split_whitespace().map(|x| x.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].0 < rows[1].0);
    assert!((rows[1].1 - 199.0).abs() < 1e-6 * 199.0);
}

#[test]
fn missing_series_gives_header_only_file() {
    let sc = Scenario::from_toml(FLOW, ".").unwrap();
    let report = execute(&sc).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.dat");
    emit_plotdata(&report, PlotKind::Curve, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.is_empty());
    assert!(text.lines().all(|l| l.starts_with('#')));
    assert!("histogram".parse::<PlotKind>().is_err());
}

#[test]
fn config_errors_point_at_the_problem() {
    let e = Scenario::from_toml("name = \"x\"\npipeline = \"flow\"\n\npoints = [[0.5, 0.0]\n", ".").unwrap_err();
    assert!(matches!(e, Error::Parse { line, .. } if line >= 4), "{e}");
    let e = Scenario::from_toml(
        "name = \"x\"\npipeline = \"norm\"\nfunctions = [\"e_1\"]\nparams = { p = 3.0, s = 0.5, alpha = 0.0 }\n",
        ".",
    )
    .unwrap_err();
    assert!(matches!(e, Error::Config { ref field, .. } if field == "params"), "{e}");
    let e = Scenario::from_toml(FLOW.replace("neg_z", "nonexistent").as_str(), ".").unwrap_err();
    assert!(matches!(e, Error::Config { ref field, .. } if field == "generator"), "{e}");
    let e = Scenario::from_toml(&format!("{FLOW}colour = \"red\"\n"), ".").unwrap_err();
    assert!(matches!(e, Error::Parse { .. }), "{e}");
}

#[test]
fn shipped_scenarios_load() {
    let mut n = 0;
    for entry in std::fs::read_dir(scenarios_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            Scenario::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 6);
}

#[test]
fn shipped_flow_scenario_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (report, _) = run_scenario(
        &scenarios_dir().join("flow_neg_z.toml"),
        &RunOptions {
            out_dir: Some(dir.path().into()),
            tol: None,
        },
    )
    .unwrap();
    let st = report.column("status").unwrap();
    assert!(report.rows.iter().all(|r| r[st].render() == "ok"));
}
