use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn zerosum(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zerosum"))
        .args(args)
        .current_dir(dir)
        .env_remove("ZEROSUM_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn strip_timing(mut v: Value) -> Value {
    if let Some(m) = v.as_object_mut() {
        m.remove("timing");
        m.remove("elapsed_ms");
    }
    v
}

#[test]
fn invariant_of_c5() {
    let dir = tempfile::tempdir().unwrap();
    let o = zerosum(dir.path(), &["invariant", "--group", "5", "--kind", "s", "--no-cache"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("9"));
}

#[test]
fn witness_s_r4_n36() {
    let dir = tempfile::tempdir().unwrap();
    let o = zerosum(dir.path(), &["witness", "--construction", "s", "--r", "4", "--n", "36", "--json-out", "-"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["group"]["factors"], serde_json::json!([2, 2, 2, 72]));
    let len: u64 = v["elements"].as_array().unwrap().iter().map(|e| e["mult"].as_u64().unwrap()).sum();
    assert_eq!(len, 148);
    assert_eq!(v["construction"]["name"], "s_witness");
}

#[test]
fn certify_theorem_a() {
    let dir = tempfile::tempdir().unwrap();
    let o = zerosum(dir.path(), &["certify", "--theorem", "thA", "--n1", "3", "--n2", "3", "--json-out", "-", "--no-cache"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "verified-exhaustive");
    let vals = &v["evidence"]["values"];
    assert_eq!((vals["s"]["value"].as_u64(), vals["eta"]["value"].as_u64(), vals["D"]["value"].as_u64()), (Some(9), Some(7), Some(5)));
}

#[test]
fn certify_value_and_etaf() {
    let dir = tempfile::tempdir().unwrap();
    let o = zerosum(dir.path(), &["certify", "--group", "2,2,2,72", "--kind", "s", "--expected", "149"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verified-witness-only"));
    let o = zerosum(dir.path(), &["certify", "--theorem", "etaf", "--h", "2,2,2", "--m", "2", "--n", "36"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("gate = 36"));
    let o = zerosum(dir.path(), &["certify", "--group", "2,2,4", "--kind", "eta", "--expected", "9", "--no-cache"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_and_decompose_files() {
    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("s.txt");
    std::fs::write(&flat, "# group: 2,2,4\n1,0,1\n1,0,1\n0,1,1\n0,1,1\n1,1,3\n").unwrap();
    let o = zerosum(dir.path(), &["check", "--sequence", "s.txt", "--query", "len=2", "--json-out", "-"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["found"], false);
    let o = zerosum(dir.path(), &["check", "--sequence", "s.txt", "--query", "len=4", "--json-out", "-"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["found"], true);

    // the JSON form written by `witness` is accepted as input
    let o = zerosum(dir.path(), &["witness", "--construction", "eta", "--r", "3", "--n", "2", "--json-out", "w.json"]);
    assert_eq!(o.status.code(), Some(0));
    let o = zerosum(dir.path(), &["check", "--sequence", "w.json", "--query", "short"]);
    assert!(stdout(&o).contains("no zero-sum"));

    let o = zerosum(dir.path(), &["decompose", "--sequence", "s.txt", "--hom", "theta", "--json-out", "-"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pairs"].as_array().unwrap().len(), 2);

    let o = zerosum(dir.path(), &["check", "--sequence", "missing.txt", "--query", "short"]);
    assert_eq!(o.status.code(), Some(64));
    let o = zerosum(dir.path(), &["check", "--sequence", "s.txt", "--query", "long"]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn lemma_runs_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = zerosum(dir.path(), &["lemma", "--id", "SUM", "--mode", "exhaustive"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = zerosum(dir.path(), &["lemma", "--id", "CYCLIC_1", "--n", "12", "--budget-nodes", "10"]);
    assert_eq!(o.status.code(), Some(2));
    let o = zerosum(dir.path(), &["lemma", "--id", "NOPE"]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn deterministic_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["invariant", "--group", "2,2,4", "--kind", "eta"][..],
        &["chain", "--group", "3,3"],
        &["lemma", "--id", "SHO", "--mode", "random", "--samples", "300"],
    ] {
        let mut outs = Vec::new();
        for _ in 0..2 {
            let mut a = args.to_vec();
            a.extend(["--deterministic", "--seed", "11", "--no-cache", "--json-out", "-"]);
            let o = zerosum(dir.path(), &a);
            let v: Value = serde_json::from_slice(&o.stdout).unwrap();
            outs.push(serde_json::to_string(&strip_timing(v)).unwrap());
        }
        assert_eq!(outs[0], outs[1], "{args:?}");
    }
}

#[test]
fn warm_cache_skips_search() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["certify", "--theorem", "th1.1", "--n", "2", "--deterministic", "--json-out", "-"];
    let cold: Value = serde_json::from_slice(&zerosum(dir.path(), &args).stdout).unwrap();
    assert!(dir.path().join("zerosum-cache.json").exists());
    assert_eq!(cold["timing"]["searches"], 2);
    let warm: Value = serde_json::from_slice(&zerosum(dir.path(), &args).stdout).unwrap();
    assert_eq!(warm["timing"]["searches"], 0);
    assert_eq!(warm["timing"]["cache_hits"], 2);
    assert_eq!(strip_timing(cold), strip_timing(warm));
}

#[test]
fn thread_env_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_zerosum"))
        .args(["gao", "--group", "6", "--no-cache"])
        .current_dir(dir.path())
        .env("ZEROSUM_THREADS", "two")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(64));
    let o = Command::new(env!("CARGO_BIN_EXE_zerosum"))
        .args(["gao", "--group", "6", "--no-cache"])
        .current_dir(dir.path())
        .env("ZEROSUM_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}
