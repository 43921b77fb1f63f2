//! End-to-end tests of the `greenlab` binary: flag handling, exit codes, the
//! frozen output schemas, and a golden-file regression pin of the
//! model-space functionals.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_greenlab"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("greenlab-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn parse_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(|s| s.to_string()).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn solve_model_emits_flat_gradient_field() {
    let dir = tmp_dir("solve-model");
    let out = run(&[
        "solve",
        "--family",
        "model",
        "--n",
        "4",
        "--k",
        "1.0",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = parse_csv(&dir.join("green.csv"));
    assert_eq!(
        header,
        ["rho", "f", "u", "u_prime", "b", "b_prime", "v_sq"],
        "green.csv schema is frozen"
    );
    for row in &rows {
        assert!((row[6] - 1.0).abs() <= 1e-8, "v_sq must be 1 on the model, got {}", row[6]);
        assert!((row[4] - row[0]).abs() <= 1e-9, "b must equal rho on the model");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("solve.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["n"], 4);
    assert!(summary["comparison_gauge"].as_bool().unwrap());
}

#[test]
fn solve_perturbed_auto_reports_admissible_k() {
    let dir = tmp_dir("solve-perturbed");
    let out = run(&[
        "solve",
        "--family",
        "perturbed",
        "--eps",
        "0.05",
        "--n",
        "3",
        "--k",
        "auto",
        "--grid",
        "256",
        "--per-decade",
        "16",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("solve.json")).unwrap()).unwrap();
    let k_star = summary["k_star"].as_f64().unwrap();
    assert!(k_star > 0.0 && k_star < 1.0, "k_star = {k_star}");
    assert_eq!(summary["k"], summary["k_star"]);
}

#[test]
fn low_dimension_is_a_usage_error() {
    let out = run(&["solve", "--family", "model", "--n", "2", "--k", "1.0"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("n must be ≥ 3"), "stderr: {stderr}");
}

#[test]
fn functionals_model_columns_and_constancy() {
    let dir = tmp_dir("functionals-model");
    let out = run(&[
        "functionals",
        "--family",
        "model",
        "--n",
        "3",
        "--k",
        "1.0",
        "--r-points",
        "25",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = parse_csv(&dir.join("functionals.csv"));
    assert_eq!(header[..4], ["r", "A", "V", "V_infty"]);
    assert!(header.contains(&"A_beta@0.5000".to_string()));
    assert!(header.contains(&"dA_formula".to_string()));
    let omega = 4.0 * std::f64::consts::PI;
    for row in &rows {
        assert!((row[1] - omega).abs() <= 1e-6, "A must equal ω on the model");
    }
}

#[test]
fn functionals_golden_regression() {
    // pins the model-space output schema and values; numeric comparison at
    // 1e-12 keeps the pin robust against last-ulp libm differences
    let dir = tmp_dir("functionals-golden");
    let out = run(&[
        "functionals",
        "--family",
        "model",
        "--n",
        "3",
        "--k",
        "1.0",
        "--r-points",
        "12",
        "--beta",
        "1.0,2.0",
        "--grid",
        "256",
        "--per-decade",
        "16",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let golden_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/functionals_model_n3.csv");
    let (header, rows) = parse_csv(&dir.join("functionals.csv"));
    let (gold_header, gold_rows) = parse_csv(&golden_path);
    assert_eq!(header, gold_header, "functionals.csv schema is frozen");
    assert_eq!(rows.len(), gold_rows.len());
    for (row, gold) in rows.iter().zip(gold_rows.iter()) {
        for (a, b) in row.iter().zip(gold.iter()) {
            let scale = b.abs().max(1.0);
            assert!((a - b).abs() <= 1e-12 * scale, "golden drift: {a} vs {b}");
        }
    }
}

#[test]
fn verify_model_passes_and_reports_bishop() {
    let dir = tmp_dir("verify-model");
    let out = run(&[
        "verify",
        "--family",
        "model",
        "--n",
        "4",
        "--k",
        "1.0",
        "--grid",
        "512",
        "--per-decade",
        "48",
        "--r-points",
        "120",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["summary"]["verdict"], "pass");
    let checks = report["checks"].as_array().unwrap();
    let bishop = checks
        .iter()
        .find(|c| c["name"] == "app.bishop_ratio")
        .expect("bishop check present");
    assert_eq!(bishop["passed"], true);
    let text = std::fs::read_to_string(dir.join("report.txt")).unwrap();
    assert!(text.contains("[PASS] app.bishop_ratio"));
}

#[test]
fn verify_injection_fails_with_exit_one() {
    let dir = tmp_dir("verify-inject");
    let out = run(&[
        "verify",
        "--family",
        "model",
        "--n",
        "4",
        "--k",
        "1.0",
        "--grid",
        "256",
        "--per-decade",
        "16",
        "--r-points",
        "60",
        "--inject",
        "mis_normalize=1.01",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "designed failure must exit 1");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["summary"]["verdict"], "fail");
    assert_eq!(report["inject"], "mis_normalize=1.01");
}

#[test]
fn verify_eps_sweep_writes_one_report_each() {
    let dir = tmp_dir("verify-sweep");
    let out = run(&[
        "verify",
        "--family",
        "perturbed",
        "--eps",
        "0.02,0.05,0.1",
        "--n",
        "3",
        "--k",
        "auto",
        "--grid",
        "512",
        "--per-decade",
        "48",
        "--r-points",
        "120",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for eps in ["0.02", "0.05", "0.1"] {
        assert!(dir.join(format!("report_eps{eps}.json")).exists());
    }
}

#[test]
fn config_file_round_trip_and_unknown_key_rejection() {
    let dir = tmp_dir("config");
    let good = dir.join("run.json");
    std::fs::write(
        &good,
        serde_json::json!({
            "manifold": {"family": "model"},
            "n": 3,
            "k": 1.0,
            "r_points": 16,
            "grid": {"interior": 256, "per_decade": 16},
            "out": dir.join("out").to_str().unwrap()
        })
        .to_string(),
    )
    .unwrap();
    let out = run(&["functionals", "--config", good.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("out/functionals.csv").exists());

    let bad = dir.join("bad.json");
    std::fs::write(
        &bad,
        serde_json::json!({
            "manifold": {"family": "model"},
            "n": 3,
            "k": 1.0,
            "mystery_knob": true
        })
        .to_string(),
    )
    .unwrap();
    let out = run(&["functionals", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "unknown keys must be rejected");
}
