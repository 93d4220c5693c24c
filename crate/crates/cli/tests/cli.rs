use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

fn qfluct(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfluct"))
        .args(args)
        .env_remove("QFLUCT_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn csv_rows(out: &Output) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s}"))
}

fn schema_columns(table: &str) -> Vec<String> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/columns.json");
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v["tables"][table]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn default_verify_passes_and_flags_phase_rsur() {
    let out = qfluct(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = csv_rows(&out);
    assert_eq!(h, schema_columns("verify"));
    let (name, ops, app, margin) = (column(&h, "name"), column(&h, "ops"), column(&h, "applicable"), column(&h, "margin"));
    let row = rows
        .iter()
        .find(|r| r[name] == "qo_phase:n=1 RSUR" && r[ops] == "N,phi")
        .expect("phase RSUR row");
    assert_eq!(row[app], "false");
    assert!(num(&row[margin]) < 0.0);
    assert!(rows.iter().all(|r| r[column(&h, "pass")] == "true"));
}

#[test]
fn single_check() {
    let out = qfluct(&["verify", "--state", "qo:n=3", "--relation", "csf", "--ops", "x,p"]);
    assert_eq!(out.status.code(), Some(0));
    let (h, rows) = csv_rows(&out);
    assert_eq!(rows.len(), 1);
    assert!(num(&rows[0][column(&h, "margin")]) >= 0.0);
}

#[test]
fn usage_errors_exit_1() {
    for args in [
        &["verify", "--resolution", "abc"][..],
        &["verify", "--resolution", "100"],
        &["verify", "--state", "nosuch:n=1"],
        &["verify", "--state", "qo:n=1", "--ops", "x,q"],
        &["measure", "--sigma", "-1"],
        &["frobnicate"],
        &["scan", "--gammas", ""],
        &["scan", "--gammas", "0:1:0"],
    ] {
        assert_eq!(qfluct(args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn ideal_measurement_has_zero_errors() {
    let out = qfluct(&["measure", "--sigma", "1", "--gamma", "0", "--lambda", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let (h, rows) = csv_rows(&out);
    assert_eq!(h, schema_columns("packet"));
    for (i, name) in h.iter().enumerate().filter(|(_, n)| n.starts_with("eps_")) {
        assert!(num(&rows[0][i]).abs() < 1e-9, "{name} = {}", rows[0][i]);
    }
}

#[test]
fn oscillator_energy() {
    let out = qfluct(&["measure", "--oscillator", "--gamma", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let (h, rows) = csv_rows(&out);
    assert_eq!(h, schema_columns("oscillator"));
    assert!((num(&rows[0][column(&h, "mean_h_out")]) - 5.0 / 6.0).abs() < 1e-3);
}

#[test]
fn width_addition() {
    let out = qfluct(&["measure", "--sigma", "3", "--gamma", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let (h, rows) = csv_rows(&out);
    assert!((num(&rows[0][column(&h, "eps_std_x")]) - 2.0).abs() < 1e-4);
}

#[test]
fn domain_violation_exits_3() {
    let out = qfluct(&["measure", "--sigma", "1", "--k", "1", "--lambda", "2"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma^2 + 2 gamma^2 - lambda^2 > 0"));
    assert!(out.stdout.is_empty());
    assert_eq!(qfluct(&["scan", "--gammas", "0", "--lambdas", "0,2"]).status.code(), Some(3));
}

#[test]
fn scan_is_sorted_and_monotone() {
    let out = qfluct(&["scan", "--gammas", "1,0,0.5", "--lambdas", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let (h, rows) = csv_rows(&out);
    assert_eq!(rows.len(), 3);
    let g: Vec<f64> = rows.iter().map(|r| num(&r[column(&h, "gamma")])).collect();
    assert_eq!(g, [0.0, 0.5, 1.0]);
    let e: Vec<f64> = rows.iter().map(|r| num(&r[column(&h, "eps_std_x")])).collect();
    assert!(e.windows(2).all(|w| w[1] > w[0]), "{e:?}");
}

#[test]
fn single_point_scan_matches_measure() {
    let scan = qfluct(&["scan", "--gammas", "0", "--lambdas", "0"]);
    let measure = qfluct(&["measure"]);
    assert_eq!(scan.status.code(), Some(0));
    assert_eq!(scan.stdout, measure.stdout);
}

#[test]
fn ten_by_ten_scan_is_fast_and_deterministic() {
    let args = ["scan", "--k", "1", "--gammas", "0:1:10", "--lambdas", "0:0.9:10"];
    let t = Instant::now();
    let first = qfluct(&args);
    let elapsed = t.elapsed().as_secs_f64();
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(csv_rows(&first).1.len(), 100);
    assert!(elapsed < 30.0, "10x10 scan took {elapsed:.1} s");
    assert_eq!(qfluct(&args).stdout, first.stdout);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qfluct"))
        .args(["measure", "--format", "json"])
        .env("QFLUCT_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("measure.json")).unwrap()).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    let cols: Vec<&String> = rows[0].as_object().unwrap().keys().collect();
    assert_eq!(cols.len(), schema_columns("packet").len());

    let named = Command::new(env!("CARGO_BIN_EXE_qfluct"))
        .args(["measure", "-o", "ideal.csv"])
        .env("QFLUCT_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(named.status.code(), Some(0));
    assert!(dir.path().join("ideal.csv").exists());
}

#[test]
fn unwritable_output_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("report.csv");
    let out = qfluct(&["measure", "-o", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
