use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cloning-optics"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

/// Parses CSV output into a header plus rows of string cells.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn cloner_sweep_matches_two_clone_fidelity() {
    let out = run(&["--experiment", "cloner", "--set", "M=2", "--set", "eta=0:1:0.05"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&out));
    let (eta, q, qty, sim, reference) = (
        column(&header, "eta"),
        column(&header, "q"),
        column(&header, "quantity"),
        column(&header, "simulated"),
        column(&header, "reference"),
    );
    let fidelity: Vec<_> = rows.iter().filter(|r| r[qty] == "fidelity").collect();
    assert_eq!(fidelity.len(), 21);
    let mut worst = 0.0f64;
    for r in fidelity {
        let (e, qv): (f64, f64) = (r[eta].parse().unwrap(), r[q].parse().unwrap());
        assert!((qv - (1.0 - e) / (1.0 + e)).abs() < 1e-15);
        // closed form recomputed here, independent of the library
        let want = (qv * qv - 2.0 * qv + 9.0) / (2.0 * (5.0 * qv * qv - 2.0 * qv + 5.0));
        let got: f64 = r[sim].parse().unwrap();
        assert!((r[reference].parse::<f64>().unwrap() - want).abs() < 1e-15);
        worst = worst.max((got - want).abs());
    }
    assert!(worst <= 1e-12, "max |Δ| = {worst}");
}

#[test]
fn formulas_table_covers_m_one_to_ten() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"schema": 1, "experiment": "formulas", "parameters": {"M": {"start": 1, "stop": 10, "step": 1}}}"#,
    );
    let out = run(&["--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&out));
    let (m_col, qty, sim) = (column(&header, "M"), column(&header, "quantity"), column(&header, "simulated"));
    for m in 1..=10usize {
        let get = |name: &str| -> Option<f64> {
            rows.iter().find(|r| r[m_col] == m.to_string() && r[qty] == name).map(|r| r[sim].parse().unwrap())
        };
        assert!((get("alpha_norm").unwrap() - 1.0).abs() < 1e-12);
        let mf = m as f64;
        let fperp = 0.5 * (1.0 + ((mf + 2.0) / (3.0 * mf)).sqrt());
        assert!((get("fidelity").unwrap() - fperp).abs() < 1e-12);
        if m >= 2 {
            let (a, b) = ((3.0 * mf).sqrt(), (mf + 2.0).sqrt());
            assert!((get("q_opt").unwrap() - (a - b) / (a + b)).abs() < 1e-9);
        } else {
            assert!(get("q_opt").is_none());
        }
    }
}

#[test]
fn two_half_swaps_verify_swap() {
    let out = run(&[
        "--experiment",
        "partial_swap",
        "--set",
        "phi=1.5707963267948966",
        "--set",
        "repeat=2",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let table: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(table["pass"], Value::Bool(true));
    let rows = table["rows"].as_array().unwrap();
    let find = |q: &str| rows.iter().find(|r| r["quantity"] == q).unwrap();
    assert_eq!(find("swap_verified")["simulated"].as_f64(), Some(1.0));
    assert!((find("stage_probability")["simulated"].as_f64().unwrap() - 0.125).abs() < 1e-12);
    assert!((find("probability")["simulated"].as_f64().unwrap() - 1.0 / 64.0).abs() < 1e-12);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for experiment in ["partial_symmetrizer", "cloner", "partial_swap", "amplifier_oracle", "formulas"] {
        for format in ["csv", "json"] {
            let a = dir.path().join(format!("{experiment}.a.{format}"));
            let b = dir.path().join(format!("{experiment}.b.{format}"));
            for path in [&a, &b] {
                let out = run(&[
                    "--experiment",
                    experiment,
                    "--format",
                    format,
                    "--seed",
                    "17",
                    "--output",
                    path.to_str().unwrap(),
                ]);
                assert_eq!(out.status.code(), Some(0), "{experiment}: {}", String::from_utf8_lossy(&out.stderr));
                assert!(out.stdout.is_empty());
            }
            assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "{experiment} {format}");
        }
    }
}

#[test]
fn seed_changes_only_randomized_rows() {
    let a = stdout(&run(&["--experiment", "cloner", "--set", "eta=[0.3]", "--seed", "1"]));
    let b = stdout(&run(&["--experiment", "cloner", "--set", "eta=[0.3]", "--seed", "2"]));
    let (header, ra) = csv_rows(&a);
    let (_, rb) = csv_rows(&b);
    let qty = column(&header, "quantity");
    for (x, y) in ra.iter().zip(&rb) {
        if x[qty] != "fidelity_random_input" {
            assert_eq!(x, y);
        }
    }
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"schema": 1, "experiment": "cloner", "parameters": {"eta": [0.2, 0.4]}, "output": {"format": "json"}}"#,
    );
    let from_file: Value = serde_json::from_str(&stdout(&run(&["--config", &cfg]))).unwrap();
    let etas: Vec<f64> = from_file["rows"].as_array().unwrap().iter().map(|r| r["eta"].as_f64().unwrap()).collect();
    assert!(etas.contains(&0.2) && etas.contains(&0.4));

    let out = run(&["--config", &cfg, "--set", "eta=0.6", "--format", "csv"]);
    let (header, rows) = csv_rows(&stdout(&out));
    let eta = column(&header, "eta");
    assert!(rows.iter().all(|r| r[eta].parse::<f64>().unwrap() == 0.6));

    let out = run(&["--config", &cfg, "--experiment", "formulas"]);
    assert_eq!(out.status.code(), Some(1), "eta does not apply to formulas");
}

fn error_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).expect("machine-readable error on stderr")
}

#[test]
fn config_errors_exit_one_with_json() {
    let dir = tempfile::tempdir().unwrap();
    for body in [
        r#"{"schema": 1, "experiment": "cloner", "extra": true}"#,
        r#"{"schema": 1, "experiment": "cloner", "parameters": {"etaa": 0.5}}"#,
        r#"{"schema": 1, "experiment": "cloner", "output": {"fmt": "csv"}}"#,
        r#"{"schema": 2, "experiment": "cloner"}"#,
        r#"{"experiment": "cloner"}"#,
        r#"{"schema": 1, "experiment": "teleport"}"#,
        r#"{"schema": 1, "experiment": "cloner", "parameters": {"eta": {"start": 0, "stop": 1, "step": -1}}}"#,
        r#"not json"#,
    ] {
        let cfg = write_config(dir.path(), body);
        let out = run(&["--config", &cfg]);
        assert_eq!(out.status.code(), Some(1), "{body}");
        assert!(out.stdout.is_empty());
        assert_eq!(error_json(&out)["error"]["kind"], "config", "{body}");
    }
    let missing = run(&["--config", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));

    let usage = run(&["--experiment", "cloner", "--no-such-flag"]);
    assert_eq!(usage.status.code(), Some(1));
    assert_eq!(error_json(&usage)["error"]["kind"], "usage");

    let conflict = run(&["--verify", "--experiment", "cloner"]);
    assert_eq!(conflict.status.code(), Some(1));

    let bad_tol = run(&["--experiment", "cloner", "--tolerance", "-1"]);
    assert_eq!(bad_tol.status.code(), Some(1));
}

#[test]
fn disagreement_is_reported_in_band() {
    let out = run(&["--experiment", "partial_symmetrizer", "--tolerance", "1e-30", "--format", "json"]);
    assert_eq!(out.status.code(), Some(2));
    let table: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(table["pass"], Value::Bool(false));
    let rows = table["rows"].as_array().unwrap();
    assert!(rows.iter().any(|r| r["pass"] == Value::Bool(false)));
    assert!(rows.iter().all(|r| (r["tolerance"].as_f64().unwrap() / 1e-30 - 1.0).abs() < 1e-12));
}

#[test]
fn verify_passes_by_default() {
    let out = run(&["--verify"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS criterion")).count(), 9);
    assert!(text.contains("9/9 criteria passed"));
}

#[test]
fn tight_tolerance_fails_gracefully() {
    let out = run(&["--verify", "--tolerance", "1e-15"]);
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out);
    let failed: Vec<_> = text.lines().filter(|l| l.starts_with("FAIL criterion")).collect();
    assert!(!failed.is_empty());
    // failing criteria print every check with its measured diff
    assert!(failed.iter().all(|l| l.contains(" diff ")));
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS criterion") || l.starts_with("FAIL criterion")).count(), 9);
}

#[test]
fn raised_m_cap_still_passes() {
    let out = run(&["--verify", "--m-cap", "7"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("9/9 criteria passed"));
}

#[test]
fn m_cap_bounds_the_cloner() {
    let out = run(&["--experiment", "cloner", "--set", "M=7", "--set", "eta=0.5"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["--experiment", "cloner", "--set", "M=7", "--set", "eta=0.5", "--m-cap", "7"]);
    assert_eq!(out.status.code(), Some(0));
}
