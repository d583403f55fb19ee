use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(home: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_medledger"))
        .args(args)
        .env("MEDLEDGER_HOME", home)
        .output()
        .expect("binary runs")
}

fn ok_json(home: &Path, args: &[&str]) -> Value {
    let out = run(home, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const RECORD: &str = r#"{"id":"p-1","name":"Elowen Strand","address":"4 Tidewater Court","country":"Ireland","dateOfBirth":"1979-11-02","test":"hb=13.1"}"#;

#[test]
fn init_and_transact() {
    let dir = tempfile::tempdir().unwrap();
    let home = dir.path();
    let summary = ok_json(home, &["net", "init"]);
    assert_eq!(summary["peers"], 9);
    assert_eq!(summary["orderers"], 3);
    assert_eq!(summary["privateStores"], 3);
    assert_eq!(summary["genesisHash"].as_str().unwrap().len(), 64);

    let receipt = ok_json(home, &["tx", "create", "--client", "Hospital/desk", "--args", RECORD]);
    assert_eq!(receipt["block"], 1);
    assert_eq!(receipt["flag"], "valid");

    let public = ok_json(home, &["tx", "read", "--client", "PublicHealth/x", "--args", r#"{"id":"p-1"}"#]);
    assert_eq!(public["country"], "Ireland");
    assert!(public.get("name").is_none());

    let private = ok_json(home, &["tx", "read-private", "--client", "Healthcenter/dr", "--args", r#"{"id":"p-1"}"#]);
    assert_eq!(private["name"], "Elowen Strand");

    let denied = run(home, &["tx", "read-private", "--client", "Hospital/desk", "--args", r#"{"id":"p-1"}"#]);
    assert!(!denied.status.success());
    assert!(String::from_utf8_lossy(&denied.stderr).contains("Hospital"));

    let updated = ok_json(
        home,
        &["tx", "update", "--client", "Hospital/desk", "--args", r#"{"id":"p-1","test":"hb=12.0"}"#],
    );
    assert_eq!(updated["block"], 2);
    let public = ok_json(home, &["tx", "read", "--client", "anon", "--args", r#"{"id":"p-1"}"#]);
    assert_eq!(public["test"], "hb=12.0");

    ok_json(home, &["tx", "delete", "--client", "anon:PublicHealth", "--args", r#"{"id":"p-1"}"#]);
    let gone = run(home, &["tx", "read", "--client", "Hospital/desk", "--args", r#"{"id":"p-1"}"#]);
    assert!(!gone.status.success());
}

#[test]
fn duplicate_create_fails() {
    let dir = tempfile::tempdir().unwrap();
    ok_json(dir.path(), &["net", "init"]);
    ok_json(dir.path(), &["tx", "create", "--client", "Hospital/desk", "--args", RECORD]);
    let again = run(dir.path(), &["tx", "create", "--client", "Hospital/desk", "--args", RECORD]);
    assert!(!again.status.success());
}

#[test]
fn init_with_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("net.json");
    std::fs::write(&cfg, r#"{"orgs":["A","B"],"peersPerOrg":2,"orderers":1,"seed":9}"#).unwrap();
    let summary = ok_json(dir.path(), &["net", "init", "--config", cfg.to_str().unwrap()]);
    assert_eq!(summary["peers"], 4);
    assert_eq!(summary["privateStores"], 2);

    std::fs::write(&cfg, r#"{"orgs":["A"],"peersPerOrg":0}"#).unwrap();
    assert!(!run(dir.path(), &["net", "init", "--config", cfg.to_str().unwrap()]).status.success());
}

#[test]
fn tx_without_network_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["tx", "read", "--client", "Hospital/x", "--args", r#"{"id":"a"}"#]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("net init"));
}

#[test]
fn bad_arguments_fail() {
    let dir = tempfile::tempdir().unwrap();
    ok_json(dir.path(), &["net", "init"]);
    for args in [
        vec!["tx", "create", "--client", "Hospital/x", "--args", "not json"],
        vec!["tx", "create", "--client", "Hospital/x", "--args", r#"{"id":"x"}"#],
        vec!["tx", "explode", "--client", "Hospital/x", "--args", "{}"],
        vec!["bench", "run", "--targets", "mainframe"],
        vec!["bench", "run", "--volumes", "100,10"],
        vec!["bench", "report", "--in", "missing.csv"],
    ] {
        assert!(!run(dir.path(), &args).status.success(), "{args:?} succeeded");
    }
}

#[test]
fn bench_run_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["bench", "run", "--volumes", "10,100,1000", "--reads", "20", "--warmup", "2", "--out", "r.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(csv.starts_with("target,volume,op,mean_ms,p95_ms,samples"));
    assert_eq!(csv.lines().count(), 1 + 2 * 3 * 2);

    let report = run(dir.path(), &["bench", "report", "--in", "r.csv", "--reference"]);
    assert!(report.status.success());
    let text = String::from_utf8_lossy(&report.stdout);
    assert!(text.contains("reference read crossover: 1342"), "{text}");
}
