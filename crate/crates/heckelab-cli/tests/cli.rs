use std::process::{Command, Output};

use serde_json::Value;

fn heckelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heckelab")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    let out = heckelab(&all);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

#[test]
fn grassmannian_count() {
    let v = json(&["gr", "--k", "1", "--n", "2", "--q", "4"]);
    assert_eq!(v["value"], "5");
    assert_eq!(v["pretty"], "q+1");
    let text = heckelab(&["gr", "--k", "1", "--n", "2", "--q", "4"]);
    assert_eq!(String::from_utf8(text.stdout).unwrap().trim(), "q+1 = 5");
}

#[test]
fn neighbors_of_trivial_rank_two() {
    let v = json(&["hecke", "neighbors", "--bundle", "0,0", "--point-degree", "2", "--weight", "1", "--q", "2"]);
    let mut counts: Vec<String> =
        v["neighbors"].as_array().unwrap().iter().map(|n| n["value"].as_str().unwrap().to_string()).collect();
    counts.sort();
    assert_eq!(counts, ["2", "3"]);
    assert_eq!(v["total"]["value"], "5");
}

#[test]
fn eigen_report() {
    let v = json(&["forms", "eigen", "--n", "2", "--q", "2", "--lambda", "3", "--depth", "5"]);
    assert_eq!(v["nullity"], 1);
    assert_eq!(v["values"].as_array().unwrap().len(), 6);
    let v = json(&["forms", "eigen", "--n", "2", "--q", "3", "--lambda", "-1/2", "--depth", "2"]);
    assert_eq!(v["values"][1]["value"], "-1/8");
}

#[test]
fn census_matches_worked_example() {
    let v = json(&["oracle", "census", "--bundle", "0,0", "--q", "2", "--poly", "1,1,1", "--weight", "1"]);
    assert_eq!(v["total"], 5);
    let rows = v["census"].as_array().unwrap();
    assert_eq!(rows[0]["bundle"], serde_json::json!([-2, 0]));
    assert_eq!(rows[0]["count"], 3);
    assert_eq!(rows[1]["count"], 2);
}

#[test]
fn smith_form_of_worked_morphism() {
    let v = json(&["oracle", "snf", "--matrix", "[[[0,1],[1,1]],[[1],[0,1]]]", "--q", "2"]);
    assert_eq!(v["diag"][1]["pretty"], "t^2+t+1");
}

#[test]
fn hall_and_hecke_agree() {
    let args = ["--from", "-1,-1", "--to", "0,0", "--point-degree", "2", "--weight", "1", "--q", "2"];
    let mut h = vec!["hall", "mult"];
    h.extend_from_slice(&args);
    let mut k = vec!["hecke", "mult"];
    k.extend_from_slice(&args);
    assert_eq!(json(&h)["value"], json(&k)["value"]);
    let mut e = vec!["hecke", "exists"];
    e.extend_from_slice(&args);
    assert_eq!(json(&e)["exists"], true);
}

#[test]
fn toroidal_and_cusp() {
    let v = json(&["forms", "toroidal", "--n", "2", "--q", "2", "--lambda", "1", "--depth", "4"]);
    assert_eq!(v["toroidal_sum"], "1");
    assert_eq!(v["forced_nullity"], 0);
    let v = json(&["forms", "cusp", "--n", "2", "--q", "2", "--lambda", "1", "--depth", "3", "--n1", "1", "--n2", "1"]);
    assert_eq!(v["cuspidal"], false);
    assert_eq!(v["defects"][0]["defect"], "1");
}

#[test]
fn quick_verify_is_clean_and_seeded() {
    let a = json(&["verify", "--quick", "--seed", "5"]);
    assert_eq!(a["mismatches"].as_array().unwrap().len(), 0);
    assert_eq!(a, json(&["verify", "--quick", "--seed", "5"]));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(heckelab(&["gr", "--k", "1", "--bogus"]).status.code(), Some(2));
    assert_eq!(heckelab(&["nosuch"]).status.code(), Some(2));
    assert_eq!(heckelab(&["hecke", "neighbors", "--bundle", "0", "--point-degree", "1", "--weight", "3"]).status.code(), Some(2));
}

#[test]
fn help_lists_every_subcommand() {
    let out = String::from_utf8(heckelab(&["--help"]).stdout).unwrap();
    for cmd in ["gr", "delta", "hall", "hecke", "oracle", "forms", "verify"] {
        assert!(out.contains(cmd), "{cmd} missing from help");
    }
}
