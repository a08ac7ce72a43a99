use std::path::Path;
use std::process::{Command, Output};

use posveri::tasks::library::x_only_routing;
use serde_json::Value;

fn posveri(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_posveri")).args(args).env_remove("POSVERI_THREADS").output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn honest_bb84_succeeds_on_every_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("honest.json");
    let o = posveri(&["honest", "--task", "bb84", "--f", "ip", "--n", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| (r["success_prob"].as_f64().unwrap() - 1.0).abs() < 1e-9));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&posveri(&["honest", "--n", "0"])), 2);
    assert_eq!(code(&posveri(&["honest", "--task", "teleport"])), 2);
    assert_eq!(code(&posveri(&["reduce", "--builtin", "identity", "--f", "const0", "--samples", "10"])), 2);
    assert_eq!(code(&posveri(&["invariants"])), 2);
    assert_eq!(code(&posveri(&["gardenhose", "--n", "3", "--quantum-verify"])), 2);
    assert_eq!(code(&posveri(&["no-such-command"])), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_posveri")).args(["bounds", "--n", "4"]).env("POSVERI_THREADS", "zero").output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn gardenhose_csv_columns_and_quantum_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gh.csv");
    let o = posveri(&["gardenhose", "--n", "1", "--quantum-verify", "--format", "csv", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "schema_version,x,y,ip,exit_side,q,c_m");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[3].starts_with("1,1,1,true,bob,"));
    let j = dir.path().join("gh.json");
    assert_eq!(code(&posveri(&["gardenhose", "--n", "1", "--quantum-verify", "--out", j.to_str().unwrap()])), 0);
    let v = json(&j);
    assert_eq!(v["ok"], true);
    assert_eq!(v["teleportation"].as_array().unwrap().len(), 4);
}

#[test]
fn reduce_emits_branch_records_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = posveri(&["reduce", "--builtin", "depolarized:0.05", "--f", "const0", "--format", "csv", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().next().unwrap(), "schema_version,input,branch,bits,verdict,lhs,markov_bound,ok");
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn reduce_reads_strategy_files() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("strategy.json");
    std::fs::write(&s, x_only_routing(1).unwrap().to_json().unwrap()).unwrap();
    let out = dir.path().join("r.json");
    let o = posveri(&["reduce", "--strategy", s.to_str().unwrap(), "--f", "x_only", "--n", "1", "--records", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&out);
    assert_eq!(v["ok"], true);
    assert_eq!(v["referee_epsilon"], 0.0);
    let rec = &v["branch_records"][0];
    for k in ["input", "branch", "bits", "verdict", "lhs", "markov_bound", "ok"] {
        assert!(!rec[k].is_null(), "missing {k}");
    }
    std::fs::write(&s, "{ not json").unwrap();
    assert_eq!(code(&posveri(&["reduce", "--strategy", s.to_str().unwrap()])), 2);
}

#[test]
fn sampled_reduction_is_reproducible() {
    let run = || posveri(&["reduce", "--builtin", "depolarized:0.2", "--f", "const0", "--samples", "500", "--seed", "9"]).stdout;
    let (a, b) = (run(), run());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn invariants_pass_and_repeat() {
    let args = ["invariants", "--seed", "4", "--cit", "50", "--continuity", "50", "--routing-floor", "5", "--disjointness", "10", "--bb84-uncertainty", "5"];
    let a = posveri(&args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, posveri(&args).stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["ok"], true);
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn bounds_report_violations_and_sweeps() {
    let o = posveri(&["bounds", "--n", "8", "--eps", "0", "--q", "2", "--cg", "0", "--cm", "0"]);
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let audit = v["reports"].as_array().unwrap().iter().find(|r| r["name"] == "main_theorem_audit").unwrap();
    assert_eq!(audit["rhs"], 7.5);
    assert_eq!(audit["satisfied"], false);

    let o = posveri(&["bounds", "--n", "4", "--eps", "0", "--q", "48", "--cg", "0", "--cm", "120"]);
    assert_eq!(code(&o), 0);

    let o = posveri(&["bounds", "--n", "16", "--function", "disj", "--eps", "0.1"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let d = v["reports"].as_array().unwrap().iter().find(|r| r["name"] == "disj_bound").unwrap();
    assert_eq!(d["value"], 4.0);
    assert!(d["satisfied"].is_null());

    let o = posveri(&["bounds", "--n", "100", "--format", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "schema_version,n,eps,cleve,nayak,nayak_ge_cleve");
    assert_eq!(text.lines().count(), 11);
    assert!(text.contains("1,100,0.0,99.5,99.5,true"));
    assert_eq!(code(&posveri(&["bounds", "--eps", "0.7"])), 2);
}
