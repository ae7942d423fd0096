use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kwidth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kwidth")).args(args).output().expect("spawn kwidth")
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn write_diag(dir: &Path) -> String {
    let p = dir.join("diag.json");
    fs::write(&p, r#"{"rows":3,"cols":3,"data":[3,0,0,0,2,0,0,0,1]}"#).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn widths_of_a_diagonal_channel() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_diag(dir.path());
    let out = kwidth(&["widths", "--input", &input]);
    assert_eq!(out.status.code(), Some(0));
    let rows = data_rows(&String::from_utf8(out.stdout).unwrap());
    let got: Vec<(String, f64)> = rows.iter().map(|r| (r[0].clone(), r[2].parse().unwrap())).collect();
    assert_eq!(got, vec![("1".into(), 3.0), ("2".into(), 2.0), ("3".into(), 1.0)]);
    assert!(rows.iter().all(|r| r[3] == "true"));
}

#[test]
fn csv_report_gets_a_json_twin() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_diag(dir.path());
    let target = dir.path().join("w.csv");
    let out = kwidth(&["widths", "--input", &input, "--domain-norm", "p1", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = data_rows(&fs::read_to_string(&target).unwrap());
    let d2: f64 = rows[1][2].parse().unwrap();
    assert!((d2 - 6.0 / 13f64.sqrt()).abs() < 1e-9);
    let twin: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("w.json")).unwrap()).unwrap();
    assert_eq!(twin["tool"], "kwidth");
    assert_eq!(twin["config"]["domain_norm"]["kind"], "p1");
}

#[test]
fn dof_on_an_eps_grid() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_diag(dir.path());
    let out = kwidth(&["dof", "--input", &input, "--eps", "0.5,1.5,2.5,3.5"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let counts: Vec<String> = data_rows(&csv).into_iter().filter(|r| r[0] == "level").map(|r| r[2].clone()).collect();
    assert_eq!(counts, ["3", "2", "1", "0"]);
}

#[test]
fn json_output_on_stdout() {
    let out = kwidth(&["widths", "--channel", "diagonal,values=4:1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["results"]["widths"][1]["upper"], 1.0);
}

#[test]
fn malformed_input_leaves_no_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.json");
    fs::write(&input, r#"{"rows":2,"cols":2,"data":[1,2,3]}"#).unwrap();
    let target = dir.path().join("r.csv");
    let out = kwidth(&["widths", "--input", input.to_str().unwrap(), "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    assert!(!target.exists() && !dir.path().join("r.json").exists());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(kwidth(&["widths", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(kwidth(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(kwidth(&["--help"]).status.code(), Some(0));
}

#[test]
fn ladder_reaches_the_diagonal_limit() {
    let out = kwidth(&["ladder", "--channel", "diagonal,size=16,decay=geometric:0.5", "--n", "2", "--ms", "1,2,4,8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.contains("converged"), "{csv}");
}
