//! End-to-end checks of the command-line interface: exit codes, JSON shapes,
//! and byte-level determinism of repeated runs.

use std::io::Write;
use std::process::{Command, Output, Stdio};

const GOLDEN: &str = r#"{"schema_version":1,"machines":[{"speed":"1"},{"speed":"2"},{"speed":"4"}],"jobs":[{"size":"6"},{"size":"4"},{"size":"1"},{"size":"3/5"}],"seed":0}"#;

fn loadbal(args: &[&str], stdin: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_loadbal"));
    cmd.args(args)
        .env("LOADBAL_THREADS", "1")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    let mut child = cmd.spawn().unwrap();
    if let Some(data) = stdin {
        child
            .stdin
            .as_mut()
            .unwrap()
            .write_all(data.as_bytes())
            .unwrap();
    }
    drop(child.stdin.take());
    child.wait_with_output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn run_reproduces_the_worked_example() {
    let out = loadbal(&["run", "--instance", "-", "--mechanism", "ppr"], Some(GOLDEN));
    let text = stdout(&out);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let steps = v["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 4);
    let chosen: Vec<u64> = steps.iter().map(|s| s["chosen"].as_u64().unwrap()).collect();
    assert_eq!(chosen, vec![2, 2, 1, 1]);
    assert_eq!(steps[3]["prices"], serde_json::json!(["5/4", "1", "0"]));
    assert_eq!(v["alg_makespan_announced"], "5/2");
    assert_eq!(v["workloads"], serde_json::json!(["0", "8/5", "10"]));
}

#[test]
fn run_is_byte_deterministic() {
    let a = loadbal(&["run", "--instance", "-"], Some(GOLDEN));
    let b = loadbal(&["run", "--instance", "-"], Some(GOLDEN));
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn gen_then_run_roundtrip() {
    let gen = loadbal(&["gen", "--family", "hardness", "--m", "4"], None);
    let inst = stdout(&gen);
    let run = loadbal(
        &["run", "--instance", "-", "--mechanism", "ppr", "--rounding-base", "1"],
        Some(&inst),
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&run)).unwrap();
    assert_eq!(v["steps"].as_array().unwrap().len(), 4);
}

#[test]
fn opt_reports_exact_value_and_witness() {
    let out = loadbal(&["opt", "--instance", "-"], Some(GOLDEN));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["value"], "2");
    assert_eq!(v["exact"], true);
    assert_eq!(v["witness"].as_array().unwrap().len(), 4);
}

#[test]
fn malformed_instance_exits_2() {
    let out = loadbal(&["run", "--instance", "-"], Some(r#"{"machines": "oops"}"#));
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn verify_fail_exits_1() {
    let gen = loadbal(&["gen", "--family", "greedy-counter", "--eps", "1/4"], None);
    let inst = stdout(&gen);
    let out = loadbal(
        &[
            "verify",
            "--instance",
            "-",
            "--mechanism",
            "greedy-true",
            "--property",
            "wb-weak",
        ],
        Some(&inst),
    );
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(v["pass"], false);
    assert_eq!(v["reports"][0]["verdict"], "fail");
    assert!(v["reports"][0]["counterexample"].is_string());
}

#[test]
fn verify_suite_passes_for_ppr() {
    let out = loadbal(&["verify", "--property", "suite", "--seeds", "3"], None);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["pass"], true);
    assert!(v["reports"].as_array().unwrap().iter().all(|r| r["verdict"] != "fail"));
}

#[test]
fn sweep_is_deterministic_modulo_runtime() {
    let args = [
        "sweep",
        "--family",
        "random",
        "--m-list",
        "2,4",
        "--seeds",
        "3",
        "--n",
        "6",
    ];
    let strip = |csv: &str| -> Vec<String> {
        csv.lines()
            .map(|l| {
                // drop the trailing runtime_ms column
                l.rsplit_once(',').map(|(head, _)| head.to_string()).unwrap()
            })
            .collect()
    };
    let a = loadbal(&args, None);
    let b = loadbal(&args, None);
    let rows = strip(&stdout(&a));
    assert_eq!(rows, strip(&stdout(&b)));
    assert_eq!(rows.len(), 7); // header + 2 m-values x 3 seeds
    assert!(rows[0].starts_with("mechanism,family,m,n,seed,alg_makespan"));
}

#[test]
fn payments_emits_a_curve_csv() {
    let out = loadbal(
        &["payments", "--instance", "-", "--machine", "2"],
        Some(GOLDEN),
    );
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "b,L,P,utility_truth,utility_best_lie"
    );
    assert!(lines.count() > 3);
}
