use std::process::{Command, Output};

use serde_json::Value;

const PERIODIC: &str = r#"{"kind":"periodic","cycle":"01"}"#;
const PD: &str = r#"{"kind":"period-doubling","levels":16}"#;

fn castleworks(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_castleworks"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report on stdout")
}

#[test]
fn word_eval_periodic() {
    let out = castleworks(&["word", "eval", "--word", PERIODIC, "--at", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["schemaVersion"], 1);
    assert_eq!(r["result"]["symbol"], "1");
    // Negative elements parse too.
    let out = castleworks(&["word", "eval", "--word", PERIODIC, "--at", "-4"]);
    assert_eq!(report(&out)["result"]["symbol"], "0");
}

#[test]
fn word_dump_is_sorted_csv() {
    let out = castleworks(&["word", "dump", "--word", PERIODIC, "--window", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "position,symbol\n-2,0\n-1,1\n0,0\n1,1\n2,0\n");
}

#[test]
fn decimal_eps_is_a_config_error() {
    let out = castleworks(&["castle", "certify", "--word", PERIODIC, "--eps", "0.25"]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["error"]["kind"], "config");
    assert!(r["error"]["message"].as_str().unwrap().contains("/params/eps"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(castleworks(&["word", "eval"]).status.code(), Some(2));
    assert_eq!(castleworks(&["word", "eval", "--word", "{", "--at", "0"]).status.code(), Some(2));
    let out = castleworks(&["run", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_config_with_kind_mismatch() {
    let dir = std::env::temp_dir().join(format!("castleworks-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("cfg.json");
    std::fs::write(
        &cfg,
        format!(r#"{{"task":"word-eval","group":{{"kind":"dihedral"}},"word":{PERIODIC},"params":{{"at":1}}}}"#),
    )
    .unwrap();
    let out = castleworks(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/group"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn certify_then_upgrade_through_files() {
    let dir = std::env::temp_dir().join(format!("castleworks-up-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cert = dir.join("cert.json");
    let out = castleworks(&[
        "castle", "certify", "--word", PD, "--eps", "1/4", "--window-radius", "256", "--report",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = castleworks(&["compare", "upgrade", "--word", PD, "--cert", cert.to_str().unwrap(), "--n", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(&out)["result"]["check"]["pass"], true);
    let out = castleworks(&["castle", "verify", "--word", PD, "--castle", cert.to_str().unwrap(), "--window-radius", "256"]);
    assert_eq!(out.status.code(), Some(0));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn exhausted_budget_exits_3() {
    let out = castleworks(&[
        "compare", "search", "--word", PD, "--src", r#"{"resolution":1,"atoms":["000","001","010","011"]}"#, "--tgt",
        r#"{"resolution":1,"atoms":["000","001","010","011","100"]}"#, "--budget", "1",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn infeasible_search_exits_1() {
    // Two atoms cannot be placed inside one.
    let out = castleworks(&[
        "compare", "search", "--word", PD, "--src", r#"{"resolution":1,"atoms":["000","001"]}"#, "--tgt",
        r#"{"resolution":1,"atoms":["100"]}"#,
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
}
