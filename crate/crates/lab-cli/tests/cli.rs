use std::io::Write;
use std::process::{Command, Output};

fn cat_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cat-lab")).args(args).output().expect("binary runs")
}

fn config(json: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(json.as_bytes()).unwrap();
    f
}

fn run_with(json: &str, args: &[&str]) -> Output {
    let f = config(json);
    let mut all = args.to_vec();
    all.extend(["--config", f.path().to_str().unwrap()]);
    cat_lab(&all)
}

fn csv_column(out: &Output, name: &str) -> Vec<String> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(col).unwrap().to_string()).collect()
}

#[test]
fn validate_passes() {
    let out = cat_lab(&["validate"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains("FAIL"));
    assert!(text.contains("(2χ, 2χ) → Φ+"));
}

#[test]
fn self_test_names_the_corrupted_check() {
    let out = cat_lab(&["validate", "--self-test"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("FAIL") && l.contains("corrupted truncation")));
    assert!(String::from_utf8(out.stderr).unwrap().contains("corrupted truncation"));
}

#[test]
fn small_dims_override_fails_validation() {
    assert_eq!(cat_lab(&["validate", "--dims", "3"]).status.code(), Some(1));
}

#[test]
fn teleport_enumerate_emits_header_and_five_rows() {
    let out = cat_lab(&["teleport"]);
    assert!(out.status.success());
    let branches = csv_column(&out, "branch");
    assert_eq!(branches, ["PhiPlus", "PhiMinus", "PsiPlus", "PsiMinus", "aggregate"]);
    let p: f64 = csv_column(&out, "probability")[..4].iter().map(|s| s.parse::<f64>().unwrap()).sum();
    assert!((p - 1.0).abs() < 1e-9);
}

#[test]
fn same_seed_gives_identical_output() {
    let cfg = r#"{"mode": "sample", "trials": 1000, "alpha": 2, "beta": 2, "gamma": 2}"#;
    let a = run_with(cfg, &["teleport", "--seed", "17"]);
    let b = run_with(cfg, &["teleport", "--seed", "17"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run_with(cfg, &["teleport", "--seed", "18"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.csv");
    let to_file = cat_lab(&["teleport", "--out", path.to_str().unwrap()]);
    assert!(to_file.status.success());
    assert_eq!(std::fs::read(&path).unwrap(), cat_lab(&["teleport"]).stdout);
}

#[test]
fn sampled_frequencies_stay_within_three_sigma() {
    let cfg = r#"{"mode": "sample", "trials": 100000, "alpha": 4, "beta": 4, "gamma": 4}"#;
    let sampled = run_with(cfg, &["teleport", "--seed", "3"]);
    let exact = run_with(r#"{"alpha": 4, "beta": 4, "gamma": 4}"#, &["teleport"]);
    let n = 100_000.0;
    for (f, p) in csv_column(&sampled, "probability").iter().zip(csv_column(&exact, "probability")).take(4) {
        let (f, p): (f64, f64) = (f.parse().unwrap(), p.parse().unwrap());
        let sigma = (p * (1.0 - p) / n).sqrt();
        assert!((f - p).abs() <= 3.0 * sigma, "frequency {f} vs {p}");
    }
}

#[test]
fn empty_sweep_grid_is_a_usage_error() {
    let out = run_with(r#"{"sweep": {"amplitudes": []}}"#, &["sweep"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("amplitudes"));
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let out = run_with("{\n  \"alpha\": 2,\n  \"betta\": 2\n}", &["teleport"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("betta") && err.contains("line 3"), "{err}");
}

#[test]
fn residual_sweep_scales_as_inverse_square() {
    let out = run_with(r#"{"sweep": {"kind": "residual", "amplitudes": [4, 8, 16, 32]}}"#, &["sweep"]);
    assert!(out.status.success());
    let slope: f64 = csv_column(&out, "log_log_slope")[0].parse().unwrap();
    assert!((slope + 2.0).abs() < 0.05, "slope {slope}");
}

#[test]
fn fidelity_sweep_is_monotone() {
    let out = run_with(r#"{"sweep": {"kind": "fidelity", "amplitudes": [1, 1.5, 2, 3, 4]}}"#, &["sweep"]);
    assert!(out.status.success());
    let v: Vec<f64> = csv_column(&out, "avg_fidelity").iter().map(|s| s.parse().unwrap()).collect();
    assert!(v.windows(2).all(|w| w[1] >= w[0]), "{v:?}");
}

#[test]
fn homodyne_reports_sign_outcomes_as_json() {
    let out = run_with(r#"{"alpha": 2, "beta": 2, "gamma": 2}"#, &["homodyne", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["path"], "homodyne");
    assert_eq!(doc["branches"].as_array().unwrap().len(), 4);
    assert!(doc["sign_error"]["combined"].as_f64().unwrap() < 1e-3);
}

#[test]
fn bell_and_eigen_emit_tables() {
    let bell = cat_lab(&["bell", "--format", "json"]);
    let rows: serde_json::Value = serde_json::from_slice(&bell.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 16);
    assert!(rows.as_array().unwrap().iter().all(|r| r["abs_error"].as_f64().unwrap() < 1e-12));
    let eigen = cat_lab(&["eigen"]);
    assert!(eigen.status.success());
    assert_eq!(csv_column(&eigen, "state").len(), 8);
}
