use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn small_config() -> Value {
    json!({
        "magnetic": { "b": 2.0 },
        "potential": {
            "alpha": 0.75 * std::f64::consts::PI,
            "epsilon": 0.2,
            "transverse": { "family": "gaussian", "amplitude": 1.0, "mu": 1.0, "beta": 1.0 },
            "longitudinal": { "family": "gaussian", "mu": 1.0 / 2.25 }
        },
        "basis": { "level_window": 1, "m_max": 3, "n_max": 16, "hermite_scale": 1.5, "tail_tol": 1.0 },
        "scan": {
            "region": { "shape": "annular_sector", "r": [0.02, 0.45], "theta": [0.01, 1.56] }
        },
        "oracle": { "n_max": 160, "hermite_scale": 8.0 },
        "toeplitz": { "m_max": 20, "radii": [0.1, 0.01, 0.001] },
        "verify": {
            "r_ladder": [0.125, 0.0625],
            "nu_gap": 0.25,
            "nu_im_cutoff": 0.5,
            "theta": 0.2,
            "eta": 0.45
        },
        "seed": 3
    })
}

fn write_config(dir: &Path, cfg: &Value) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn magspec(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magspec"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .env("MAGSPEC_THREADS", "2")
        .output()
        .unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn toeplitz_writes_exact_gaussian_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &small_config());
    let out = magspec(&["toeplitz"], &cfg, dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = rows(&dir.path().join("toeplitz.csv"));
    assert_eq!(table.len(), 21);
    for row in &table {
        let m: i32 = row[0].parse().unwrap();
        let mu: f64 = row[1].parse().unwrap();
        // W = (epsilon / 2) exp(-r^2) int G with b = 2.
        let scale = 0.1 * (std::f64::consts::PI * 2.25).sqrt();
        let exact = scale * 0.5f64.powi(m + 1);
        assert!(
            (mu - exact).abs() < 1e-10 * exact,
            "m = {m}: {mu} vs {exact}"
        );
    }
    let counts = rows(&dir.path().join("counting.csv"));
    let n: Vec<usize> = counts.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(n.windows(2).all(|w| w[0] <= w[1]), "{n:?}");
}

#[test]
fn scan_is_deterministic_and_sector_report_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &small_config());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = magspec(&["scan"], &cfg, out);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let first = fs::read(a.join("eigenvalues.csv")).unwrap();
    assert_eq!(first, fs::read(b.join("eigenvalues.csv")).unwrap());
    assert_eq!(
        fs::read(a.join("sector_report.json")).unwrap(),
        fs::read(b.join("sector_report.json")).unwrap()
    );

    let eigs = rows(&a.join("eigenvalues.csv"));
    assert!(!eigs.is_empty());
    let report: Value =
        serde_json::from_slice(&fs::read(a.join("sector_report.json")).unwrap()).unwrap();
    let classified = report["eigenvalues"].as_array().unwrap();
    assert_eq!(classified.len(), eigs.len());
    for (row, c) in eigs.iter().zip(classified) {
        let re_k: f64 = row[2].parse().unwrap();
        let im_k: f64 = row[3].parse().unwrap();
        assert!(re_k > 0.0 && im_k > 0.0);
        assert_eq!(c["class"]["region"], "localization");
    }
}

#[test]
fn verify_passes_on_small_basis() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &small_config());
    let out = magspec(&["verify"], &cfg, dir.path());
    let report: Value =
        serde_json::from_slice(&fs::read(dir.path().join("verdicts.json")).unwrap()).unwrap();
    assert!(out.status.success(), "{report:#}");
    assert_eq!(report["pass"], true);
    assert_eq!(report["seed"], 3);
    assert!(!report["cross_validation"]["oracle_to_determinant"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn asymptotics_reports_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg["toeplitz"]["radii"] = json!([1e-3, 1e-5, 1e-7]);
    let cfg = write_config(dir.path(), &cfg);
    let out = magspec(&["asymptotics"], &cfg, dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = rows(&dir.path().join("asymptotics.csv"));
    assert_eq!(table.len(), 3);
    let report: Value =
        serde_json::from_slice(&fs::read(dir.path().join("asymptotics.json")).unwrap()).unwrap();
    assert_eq!(report["regime"]["regime"], "gaussian");
}

fn error_of(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(2));
    let line = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(line.lines().last().unwrap()).unwrap()
}

#[test]
fn unknown_field_is_a_structured_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg["basis"]["typo"] = json!(1);
    let cfg = write_config(dir.path(), &cfg);
    let err = error_of(&magspec(&["toeplitz"], &cfg, dir.path()));
    assert_eq!(err["error"], "error");
    assert!(err["causes"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c.as_str().unwrap().contains("typo")));
}

#[test]
fn invalid_parameter_reports_its_kind() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg["magnetic"]["b"] = json!(-1.0);
    let cfg = write_config(dir.path(), &cfg);
    let err = error_of(&magspec(&["toeplitz"], &cfg, dir.path()));
    assert_eq!(err["error"], "invalid_argument");
}

#[test]
fn missing_block_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.as_object_mut().unwrap().remove("oracle");
    let cfg = write_config(dir.path(), &cfg);
    let err = error_of(&magspec(&["oracle"], &cfg, dir.path()));
    assert!(err["message"].as_str().unwrap().contains("oracle"));
}
