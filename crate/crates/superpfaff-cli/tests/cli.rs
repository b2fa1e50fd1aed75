use std::io::Write;
use std::process::{Command, Output};

use serde_json::{json, Value};
use superpfaff::superlinalg::SuperMatrix;
use superpfaff::Rational;
use tempfile::NamedTempFile;

fn superpfaff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superpfaff")).args(args).output().expect("binary runs")
}

fn write_json(v: &Value) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    write!(f, "{v}").unwrap();
    f
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad stdout ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn eval(point: Value, extra: &[&str]) -> Output {
    let f = write_json(&point);
    let mut args = vec!["eval", f.path().to_str().unwrap()];
    args.extend_from_slice(extra);
    superpfaff(&args)
}

#[test]
fn eval_one_over_c() {
    let o = eval(json!({"space": {"m": 2, "n": 0}, "A": [[0, -3], [3, 0]], "B": [], "C": [], "D": []}), &[]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["stratum"], json!([2, 0]));
    assert!((v["value"][0].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(v["value"][1].as_f64().unwrap(), 0.0);
    assert_eq!(v["exact"]["terms"][0]["re"], json!({"num": 1, "den": 3}));
}

#[test]
fn eval_odd_block_gives_c() {
    let o = eval(json!({"space": {"m": 0, "n": 2}, "A": [], "B": [], "C": [], "D": [[0, -5], [5, 0]]}), &["--with-oracle"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["value"], json!([5.0, 0.0]));
    assert_eq!(v["discrepancy"], json!(0.0));
}

#[test]
fn eval_full_weil_entries() {
    let w = |c: i64| json!({"n_gen": 2, "terms": [{"gens": [], "re": c}]});
    let z = json!({"n_gen": 2, "terms": []});
    let point = json!({"space": {"m": 2, "n": 0}, "A": [[z, w(-2)], [w(2), z]], "B": [[], []], "C": [], "D": []});
    let v = stdout_json(&eval(point, &["--mode", "complex"]));
    assert_eq!(v["mode"], json!("complex"));
    assert_eq!(v["value"]["n_gen"], json!(2));
}

#[test]
fn float_input_falls_back_to_complex() {
    let v = stdout_json(&eval(json!({"space": {"m": 2, "n": 0}, "A": [[0, -0.5], [0.5, 0]], "B": [], "C": [], "D": []}), &[]));
    assert_eq!(v["mode"], json!("complex"));
    assert!((v["value"][0].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn singular_body_exits_4() {
    let o = eval(json!({"space": {"m": 2, "n": 0}, "A": [[0, 0], [0, 0]], "B": [], "C": [], "D": []}), &[]);
    assert_eq!(o.status.code(), Some(4));
    assert!(!o.stderr.is_empty());
}

#[test]
fn malformed_input_exits_2() {
    let o = eval(json!({"space": {"m": 3, "n": 0}, "A": [], "B": [], "C": [], "D": []}), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(superpfaff(&["eval", "/nonexistent/point.json"]).status.code(), Some(2));
    assert_eq!(superpfaff(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn parity_violation_exits_3() {
    let odd = json!({"n_gen": 1, "terms": [{"gens": [1], "re": 1}]});
    let z = json!({"n_gen": 1, "terms": []});
    let point = json!({"space": {"m": 2, "n": 0}, "A": [[z, odd], [z, z]], "B": [[], []], "C": [], "D": []});
    assert_eq!(eval(point.clone(), &[]).status.code(), Some(3));
    let f = write_json(&point);
    let o = superpfaff(&["validate", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let v = stdout_json(&o);
    assert_eq!(v["violations"][0], json!({"block": "A", "row": 1, "col": 2, "violation": "parity"}));
}

#[test]
fn validate_reports_non_spo_entries() {
    let f = write_json(&json!({"space": {"m": 2, "n": 0}, "A": [[1, 0], [0, 0]], "B": [], "C": [], "D": []}));
    let o = superpfaff(&["validate", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stdout_json(&o)["valid"], json!(false));
}

#[test]
fn check_square_passes() {
    let o = superpfaff(&["check", "square", "--n", "100", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["points"], json!(100));
    assert!(v["max_rel_err"].as_f64().unwrap() < 1e-9);
}

#[test]
fn check_is_deterministic_and_writes_out() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let args = ["check", "oracle", "--points", "5", "--seed", "3", "--mode", "complex", "--out", out.to_str().unwrap()];
    assert_eq!(superpfaff(&args).status.code(), Some(0));
    let first = std::fs::read_to_string(&out).unwrap();
    superpfaff(&args);
    assert_eq!(first, std::fs::read_to_string(&out).unwrap());
}

#[test]
fn check_rejects_unknown_suite_and_bad_tol() {
    assert_eq!(superpfaff(&["check", "nonsense"]).status.code(), Some(2));
    assert_eq!(superpfaff(&["check", "square", "--tol", "-1"]).status.code(), Some(2));
}

#[test]
fn random_points_are_in_the_algebra_and_group() {
    let o = superpfaff(&["random", "spo", "2", "2", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let x = SuperMatrix::<Rational>::from_json(&stdout_json(&o)).unwrap();
    assert!(x.is_spo());
    assert_eq!(o.stdout, superpfaff(&["random", "spo", "2", "2", "--seed", "1"]).stdout);

    for extra in [&[][..], &["--reflect"][..]] {
        let mut args = vec!["random", "SpO", "2", "2", "--seed", "1"];
        args.extend_from_slice(extra);
        let g = SuperMatrix::<Rational>::from_json(&stdout_json(&superpfaff(&args))).unwrap();
        assert!(g.is_spo_group());
    }
}

#[test]
fn random_with_stratum() {
    let o = superpfaff(&["random", "spo", "4", "0", "--seed", "2", "--stratum", "1,3"]);
    let x = SuperMatrix::<Rational>::from_json(&stdout_json(&o)).unwrap();
    let f = write_json(&x.to_json());
    assert_eq!(stdout_json(&superpfaff(&["eval", f.path().to_str().unwrap()]))["stratum"], json!([1, 3]));
    assert_eq!(superpfaff(&["random", "spo", "4", "0", "--stratum", "1,1"]).status.code(), Some(2));
}

#[test]
fn random_rejects_odd_m() {
    assert_eq!(superpfaff(&["random", "spo", "3", "2"]).status.code(), Some(2));
}

#[test]
fn probe_converges_to_one_over_c() {
    let f = write_json(&json!({"space": {"m": 2, "n": 0}, "A": [[0, -2], [2, 0]], "B": [], "C": [], "D": []}));
    let v = stdout_json(&superpfaff(&["probe", f.path().to_str().unwrap()]));
    assert!((v["limit"][0].as_f64().unwrap() - 0.5).abs() < 1e-8);
    assert_eq!(v["values"].as_array().unwrap().len(), 8);
}
