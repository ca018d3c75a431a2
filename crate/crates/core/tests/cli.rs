use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abelian-height"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn classify_prints_record() {
    let v = json(&run(&["classify", "--p", "3", "--curve", "x^5+x^2+1", "--verify"]));
    assert_eq!(v["p_rank"], 1);
    assert_eq!(v["height"], 2);
    assert_eq!(v["case"], "pRank1");
    assert_eq!(v["slopes"], serde_json::json!(["0", "1/2", "1/2", "1"]));
}

#[test]
fn classify_supersingular_has_null_height() {
    let v = json(&run(&["classify", "--p", "3", "--curve", "x^5+1"]));
    assert_eq!(v["height"], Value::Null);
    assert_eq!(v["height_is_infinite"], true);
    assert_eq!(v["case"], "ssNotSuperspecial");
    assert_eq!(v["l_poly"], Value::Null);
}

#[test]
fn classify_elliptic_and_extension_field() {
    let v = json(&run(&["classify", "--p", "3", "--curve", "x^3+x", "--verify"]));
    assert_eq!((v["genus"].as_u64(), v["p_rank"].as_u64()), (Some(1), Some(0)));
    let v = json(&run(&["classify", "--p", "3", "--field-deg", "2", "--curve", "x^5+(t)*x+1", "--verify"]));
    assert_eq!(v["field_deg"], 2);
}

#[test]
fn usage_errors_exit_with_1() {
    for args in [
        &["classify", "--curve", "x^5+1"][..],
        &["classify", "--p", "3", "--curve", "x^4+1"],
        &["classify", "--p", "4", "--curve", "x^5+1"],
        &["classify", "--p", "3", "--curve", "x^^5"],
        &["census", "--p", "3", "--degree", "7"],
        &["frobnicate"],
        &["formal-group", "--p", "5", "--a", "1"],
    ] {
        assert_eq!(run(args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn census_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c.csv");
    let out = run(&["census", "--p", "3", "--degree", "5", "--verify", "--jobs", "2", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,f,p_rank,a_number,height,case,a1,a2"));
    assert_eq!(lines.count(), 324);

    let out = run(&["census", "--p", "3", "--genus", "1", "--format", "json"]);
    let v = json(&out);
    assert_eq!(v["total"], 6);
    assert_eq!(v["records"].as_array().unwrap().len(), 6);
}

#[test]
fn tables_rows_and_check() {
    let v = json(&run(&["tables", "--type", "ssp", "--i", "3"]));
    assert_eq!(v[0]["b"], serde_json::json!([2, 5, 3]));
    let v = json(&run(&["tables", "--type", "h2", "--i", "1"]));
    assert_eq!(v[0]["image_z"], "unstated");
    let out = run(&["tables", "--check"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(run(&["tables", "--type", "h3"]).status.code(), Some(1));
}

#[test]
fn dieudonne_model_json() {
    let v = json(&run(&["dieudonne", "--height", "2", "--len", "3"]));
    assert_eq!(v["ker_f"], serde_json::json!([1, 1, 1]));
    assert_eq!(v["phi2_vanishes"], false);
    let v = json(&run(&["dieudonne", "--height", "inf", "--len", "4"]));
    assert_eq!(v["ker_f"], serde_json::json!([1, 2, 3, 4]));
    assert_eq!(run(&["dieudonne", "--height", "2", "--len", "0"]).status.code(), Some(1));
}

#[test]
fn formal_group_heights() {
    let v = json(&run(&["formal-group", "--p", "3", "--a", "1", "--b", "0"]));
    assert_eq!((v["valuation"].as_u64(), v["height"].as_u64()), (Some(9), Some(2)));
    let v = json(&run(&["formal-group", "--p", "5", "--builtin", "gm"]));
    assert_eq!(v["height"], 1);
    let v = json(&run(&["formal-group", "--p", "5", "--builtin", "ga"]));
    assert_eq!(v["height_is_infinite"], true);
}

#[test]
fn witt_selfcheck_passes() {
    let v = json(&run(&["witt", "selfcheck", "--p", "5", "--field-deg", "2", "--len", "3", "--samples", "30"]));
    assert!(v.as_array().unwrap().iter().all(|r| r["failures"] == 0));
}
