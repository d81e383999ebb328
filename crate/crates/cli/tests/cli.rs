//! End-to-end runs of the `adcert` binary: exit codes, file formats, and
//! byte-level determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn adcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adcert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn gen_t1(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("t1.json");
    let out = adcert(&["gen-code", "--t", "1", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
    path
}

#[test]
fn gen_code_writes_the_expected_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen_t1(dir.path());
    let value: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(value["m"], 13);
    assert_eq!(value["t"], 1);
    assert_eq!(value["weights"]["0"]["0"], "1/8");
    assert_eq!(value["weights"]["0"]["6"], "3/4");
    assert_eq!(value["weights"]["0"]["12"], "1/8");
    assert_eq!(value["weights"]["1"]["3"], "1/2");
    assert_eq!(value["weights"]["1"]["9"], "1/2");
}

#[test]
fn gen_code_rejects_order_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let out = adcert(&["gen-code", "--t", "0", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!path.exists());
}

#[test]
fn certify_accepts_the_generated_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen_t1(dir.path());
    let out = adcert(&["certify", "--code", path.to_str().unwrap(), "--t", "1"]);
    assert!(out.status.success(), "{out:?}");
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["lemma4"], true);
    assert_eq!(report["cross_terms_zero"], true);
    assert_eq!(report["first_mismatch"], Value::Null);
    // Frozen moment rows for the 13-qubit code.
    assert_eq!(report["moment_table"]["values"][0][0], serde_json::json!(["1", "6", "39/2"]));
    assert_eq!(report["moment_table"]["values"][0][1], serde_json::json!(["7", "33", "87"]));
    assert_eq!(
        report["moment_table"]["values"][0],
        report["moment_table"]["values"][1]
    );
    let slope = report["eps_slope"].as_f64().unwrap();
    assert!(slope > 2.8 && slope < 3.2, "{slope}");
}

#[test]
fn certify_flags_a_perturbed_weight() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen_t1(dir.path());
    let mut value: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    // Move 1/100 of weight between two support points; normalization is
    // preserved so only the moment rows can object.
    value["weights"]["0"]["0"] = Value::from("23/200");
    value["weights"]["0"]["6"] = Value::from("19/25");
    let broken = dir.path().join("broken.json");
    fs::write(&broken, value.to_string()).unwrap();
    let out = adcert(&["certify", "--code", broken.to_str().unwrap(), "--t", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["lemma4"], false);
    assert_eq!(report["first_mismatch"], serde_json::json!([0, 1]));
}

#[test]
fn missing_code_file_is_a_config_error() {
    let out = adcert(&["certify", "--code", "/nonexistent/code.json", "--t", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("/nonexistent/code.json"), "{stderr}");
}

#[test]
fn sweep_is_deterministic_and_checked() {
    let dir = tempfile::tempdir().unwrap();
    let code = gen_t1(dir.path());
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = adcert(&[
            "sweep",
            "--code",
            code.to_str().unwrap(),
            "--gammas",
            "0.01,0.03,0.1",
            "--seed",
            "7",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{out:?}");
        (
            fs::read(out_dir.join("sweep.csv")).unwrap(),
            fs::read(out_dir.join("kl_reports.json")).unwrap(),
        )
    };
    let (csv_a, json_a) = run("a");
    let (csv_b, json_b) = run("b");
    assert_eq!(csv_a, csv_b, "same seed must give identical bytes");
    assert_eq!(json_a, json_b);

    let text = String::from_utf8(csv_a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "gamma,eta,leung_bound,theorem1_bound,worst_case_fidelity,fidelity_mixed_logical"
    );
    let rows: Vec<&str> = lines.clone().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 3);
    for row in &rows {
        let cells: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells.len(), 6);
        let (leung, theorem1_bound, wc) = (cells[2], cells[3], cells[4]);
        let eta = cells[1];
        assert!(theorem1_bound <= wc + 1e-9);
        assert!(leung / (1.0 + eta) <= wc + 1e-9);
    }
    assert_eq!(lines.filter(|l| l.starts_with('#')).count(), 3);

    let reports: Value = serde_json::from_slice(&json_a).unwrap();
    let first = reports.as_array().unwrap().first().unwrap().as_object().unwrap();
    let keys: Vec<&String> = first.keys().collect();
    assert_eq!(
        keys,
        ["eps_max", "gamma", "lambda_min_G", "theorem1_bound", "trace_G"]
    );
}

#[test]
fn sweep_rejects_bad_grids() {
    let dir = tempfile::tempdir().unwrap();
    let code = gen_t1(dir.path());
    let out_dir = dir.path().join("out");
    for grid in ["0.1,0.05", "0.0,0.1", "0.5,1.0"] {
        let out = adcert(&[
            "sweep",
            "--code",
            code.to_str().unwrap(),
            "--gammas",
            grid,
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(2), "grid {grid}");
    }
}

#[test]
fn verify_identities_reports_the_printed_form_failures() {
    let out = adcert(&["verify-identities", "--max-n", "30", "--max-m", "12"]);
    assert!(out.status.success(), "{out:?}");
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["alternating_sum_zero"], true);
    assert_eq!(report["boundary_matches_factorial"], true);
    assert_eq!(report["corrected_ratio_matches"], true);
    assert!(report["printed_ratio_mismatches"].as_u64().unwrap() > 0);
}
