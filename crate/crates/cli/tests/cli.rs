//! End-to-end checks of the `mechdock` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_mechdock");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn mechdock")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn attack_to(dir: &Path, name: &str, args: &[&str]) -> std::path::PathBuf {
    let path = dir.join(name);
    let mut full = vec!["attack"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--report", path.to_str().unwrap()]);
    let o = run(&full);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    path
}

#[test]
fn gen_prints_the_two_by_two_instance() {
    let o = run(&["gen", "--construction", "d2x2"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["n"], 2);
    assert_eq!(v["costs"][0][1], "1e2");
    assert_eq!(v["costs"][1][1], "1e1");
}

#[test]
fn gen_main_writes_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("an.json");
    let o = run(&["gen", "--construction", "an", "--r", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["n"], 10);
}

#[test]
fn attack_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    for (name, args) in [
        ("main.json", vec!["--strategy", "main", "--mechanism", "minwork"]),
        ("s2x2.json", vec!["--strategy", "s2x2", "--mechanism", "optmakespan"]),
        ("s3x3.json", vec!["--strategy", "s3x3", "--mechanism", "minwork"]),
        ("s3x4.json", vec!["--strategy", "s3x4", "--mechanism", "random:5"]),
    ] {
        let path = attack_to(dir.path(), name, &args);
        let o = run(&["verify", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
        assert!(stdout(&o).starts_with("ok:"));
    }
}

#[test]
fn attack_summary_reports_the_bound() {
    let o = run(&["attack", "--strategy", "main", "--mechanism", "minwork"]);
    assert!(o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("kind=RatioWitness bound=2.873000"), "{err}");
}

#[test]
fn tampered_report_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let path = attack_to(dir.path(), "r.json", &["--strategy", "main", "--mechanism", "minwork"]);
    let text = fs::read_to_string(&path).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["verdict"]["claimed"] = serde_json::Value::String("4".into());
    fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    let o = run(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("defect"));
}

#[test]
fn bad_parameters_exit_two() {
    assert_eq!(run(&["attack", "--strategy", "main", "--mechanism", "minwork", "--a", "1/2"]).status.code(), Some(2));
    assert_eq!(run(&["attack", "--strategy", "main", "--mechanism", "nosuch"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn bounds_csv_rows() {
    let o = run(&["bounds", "--r", "3,4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["r", "n", "k_c", "a", "bound", "feasible", "source"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][0], "3");
    assert_eq!(&rows[0][1], "10");
    assert_eq!(&rows[0][4], "2.873000");
    assert_eq!(&rows[0][6], "table");
}

#[test]
fn wmon_counts_violations() {
    let o = run(&["wmon", "--mechanism", "minwork", "--trials", "200"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("violations=0"));
    let o = run(&["wmon", "--mechanism", "optmakespan", "--exhaustive"]);
    assert!(o.status.success());
    assert!(!stdout(&o).contains("violations=0"));
}

#[test]
fn external_mechanism_through_serve() {
    let selector = format!("extern:{BIN} serve --mechanism minwork");
    let o = run(&["attack", "--strategy", "s3x3", "--mechanism", &selector]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"]["kind"], "RatioWitness");
    assert_eq!(v["verdict"]["claimed"], "19548/8863");
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--strategy", "main", "--mechanism", "random:11"];
    let a = fs::read(attack_to(dir.path(), "a.json", &args)).unwrap();
    let b = fs::read(attack_to(dir.path(), "b.json", &args)).unwrap();
    assert_eq!(a, b);
}
