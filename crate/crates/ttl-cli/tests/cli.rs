use std::process::{Command, Output};

use serde_json::Value;

fn ttl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ttl")).args(args).env_remove("TTL_CAP_ENUM").output().expect("run ttl")
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = ttl(&all);
    assert!(out.status.code().is_some_and(|c| c <= 1), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("one JSON document")
}

#[test]
fn count_three_ways() {
    let v = json(&["count", "--p", "5", "--type", "inert", "--s", "0", "--n", "1", "--method", "both"]);
    assert_eq!(v["value_brute"], 6);
    assert_eq!(v["value_formula"], 6);
    assert_eq!(v["smooth"], true);
    for key in ["p", "type", "s", "n", "elliptic", "sign", "fixed_labels", "exceptional"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let split = json(&["count", "--p", "5", "--type", "split", "--s", "0", "--n", "1"]);
    assert_eq!(split["value_formula"], 3);
}

#[test]
fn nodal_count_routes_to_closed_formula() {
    // 3^3 = 27 n with n = 1 at p = 7
    let v = json(&["count", "--p", "7", "--type", "split", "--s", "3", "--n", "1"]);
    assert_eq!(v["smooth"], false);
    assert_eq!(v["value_formula"], 4);
    assert_eq!(v["value_brute"], 4);
    assert_eq!(v["exceptional"], 3);
}

#[test]
fn singular_splits_digits() {
    let v = json(&[
        "branch", "--algebra", "p=5;split=0,1,2", "--eta", "1|6|11", "--gamma", "1|-2|1", "--k", "3", "--oracle",
    ]);
    assert_eq!(v["oracle_agrees"], true);
    let d = &v["descriptors"][0];
    assert_eq!(d["tag"], "SingularSurviving");
    let roots: Vec<u64> = d["branches"].as_array().unwrap().iter().map(|b| b["r"].as_u64().unwrap()).collect();
    assert_eq!(roots, vec![0, 1]);
}

#[test]
fn nodal_and_coset() {
    let v = json(&["nodal", "--p", "7", "--type", "split", "--gamma", "1,0,0"]);
    assert_eq!(v["pass"], true);
    assert_eq!(v["exceptional_size"], 3);
    let v = json(&["coset", "--p", "5", "--type", "mixed", "--gamma", "1,0,0", "--s", "0", "--exhaustive"]);
    assert_eq!(v["pass"], true);
}

#[test]
fn census_and_stats() {
    let v = json(&["census", "--p", "5", "--type", "inert", "--gamma", "1,0,0", "--omega", "0,1,0", "--s", "0", "--fibers", "all"]);
    assert_eq!(v["pass"], true);
    let v = json(&["cubeclass", "--p", "5", "--type", "split", "--A", "1"]);
    assert_eq!(v["counts"], serde_json::json!([60, 0, 0]));
    let v = json(&["jets", "--p", "5", "--type", "inert", "--omega", "0,1,0", "--c", "1"]);
    assert_eq!(v["frequencies_exact"], true);
    assert_eq!(v["freq_zero"], serde_json::json!({"num": 1, "den": 5}));
}

#[test]
fn rankd_demos() {
    let v = json(&["rankd", "--p", "7", "--d", "3", "--demo", "sharpness"]);
    assert_eq!(v["result"]["values"], serde_json::json!([0, 0, 49]));
    let v = json(&["rankd", "--p", "7", "--d", "3", "--demo", "affine"]);
    assert_eq!(v["result"]["values"][3], 2058);
    let v = json(&["rankd", "--p", "7", "--d", "4", "--demo", "versality", "--q-coeffs", "3,0,1,2"]);
    assert_eq!(v["result"]["pass"], true);
}

#[test]
fn wieferich_scan() {
    let v = json(&["wieferich", "--g", "\u{2212}1,\u{2212}1,0", "--eta", "0,1,0", "--pmin", "5", "--pmax", "200"]);
    assert_eq!(v["inert"], 15);
    assert_eq!(v["all_checks"], true);
}

#[test]
fn verify_all_default_passes() {
    let out = ttl(&["verify-all", "--pset", "5,7"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn injected_fault_is_reported() {
    let out = ttl(&["verify-all", "--pset", "5", "--criteria", "1", "--inject-fault", "c1.example.p5.inert"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("c1.example.p5.inert"));
    assert!(text.contains("expected 6 got 7"));
}

#[test]
fn json_is_deterministic() {
    let args = ["--json", "--seed", "7", "verify-all", "--pset", "5", "--criteria", "5,8", "--contexts", "20"];
    let a = ttl(&args);
    let b = ttl(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 7);
    let ids: Vec<u64> = v["criteria"].as_array().unwrap().iter().map(|c| c["criterion"].as_u64().unwrap()).collect();
    assert_eq!(ids, vec![5, 8]);
}

#[test]
fn exit_codes() {
    assert_eq!(ttl(&["count", "--p", "5"]).status.code(), Some(2));
    assert_eq!(ttl(&["count", "--p", "5", "--type", "odd", "--s", "0", "--n", "1"]).status.code(), Some(2));
    assert_eq!(ttl(&["count", "--p", "5", "--type", "split", "--s", "0", "--n", "0"]).status.code(), Some(2));
    assert_eq!(ttl(&["verify-all", "--pset", "4"]).status.code(), Some(2));
    let capped = Command::new(env!("CARGO_BIN_EXE_ttl"))
        .args(["count", "--p", "7", "--type", "split", "--s", "0", "--n", "1"])
        .env("TTL_CAP_ENUM", "5")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(2));
}
