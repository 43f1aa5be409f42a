use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_sepnet");

const HOP: &str = r#"{
    "nodes": 2,
    "edges": [{"from": 1, "to": 2, "channel": {"type": "dmc", "kernel": [[0.89, 0.11], [0.11, 0.89]]}}],
    "sources": {"type": "iid", "node": 1, "law": [0.5, 0.5]},
    "demands": [{"a": 1, "b": 2}],
    "code": {"name": "uncoded", "params": {"block_len": 4, "channel_uses": 4}},
    "trials": 400,
    "seed": 5
}"#;

fn scenario(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn sepnet(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    if let Some(w) = workers {
        cmd.env("SEPNET_WORKERS", w);
    }
    cmd.output().unwrap()
}

fn run_ok(sub: &str, scenario: &Path, out: &Path, extra: &[&str]) -> Value {
    let mut args = vec![sub, "--scenario", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = sepnet(&args, None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let name = if sub == "run" { "simulate" } else { sub };
    serde_json::from_str(&std::fs::read_to_string(out.join(format!("{name}.json"))).unwrap()).unwrap()
}

#[test]
fn malformed_kernel_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bad = scenario(dir.path(), "bad.json", &HOP.replace("[0.11, 0.89]", "[0.11, 0.79]"));
    let o = sepnet(&["simulate", "--scenario", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], None);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("invalid_kernel"), "{err}");
    assert!(!dir.path().join("simulate.json").exists());
}

#[test]
fn simulate_writes_report_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(dir.path(), "hop.json", HOP);
    let v = run_ok("simulate", &s, dir.path(), &["--trials", "2000"]);
    assert_eq!(v["schema"], "simulate");
    assert_eq!(v["seed"], 5);
    let d = &v["result"]["distortion"];
    let (mean, se) = (d["matrix"][0][1].as_f64().unwrap(), d["stderr"][0][1].as_f64().unwrap());
    assert!((mean - 0.11).abs() <= 4.0 * se, "{mean} ± {se}");
    assert_eq!(d["matrix"][1][0], 0.0);
    let trace = std::fs::read_to_string(dir.path().join("trace_edge0.csv")).unwrap();
    assert!(trace.starts_with("t,x,y\n"));
    assert_eq!(trace.lines().count(), 5);
}

#[test]
fn single_layer_stack_check_matches_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let text = HOP.replace(r#""seed": 5"#, r#""seed": 5, "experiment": {"kind": "stack-check", "layers": 1}"#);
    let s = scenario(dir.path(), "stack.json", &text);
    let v = run_ok("stack-check", &s, dir.path(), &["--trials", "200"]);
    assert_eq!(v["result"]["exact_match"], true);
    assert_eq!(v["result"]["layers"], 1);
}

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(dir.path(), "hop.json", HOP);
    let mut outputs = Vec::new();
    for (i, workers) in ["1", "3", "1"].iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        let o = sepnet(
            &["simulate", "--scenario", s.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "11"],
            Some(workers),
        );
        assert!(o.status.success());
        outputs.push((
            std::fs::read(out.join("simulate.json")).unwrap(),
            std::fs::read(out.join("trace_edge0.csv")).unwrap(),
        ));
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    let other = dir.path().join("other");
    sepnet(&["simulate", "--scenario", s.to_str().unwrap(), "--out", other.to_str().unwrap(), "--seed", "12"], None);
    assert_ne!(std::fs::read(other.join("simulate.json")).unwrap(), outputs[0].0);
}

#[test]
fn capacity_of_scenario_edges() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(dir.path(), "hop.json", HOP);
    let v = run_ok("capacity", &s, dir.path(), &[]);
    let c = v["result"][0]["value"].as_f64().unwrap();
    let h = -(0.11f64 * 0.11f64.log2() + 0.89 * 0.89f64.log2());
    assert!((c - (1.0 - h)).abs() < 1e-6);
}

#[test]
fn separation_report_fields() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(
        dir.path(),
        "sep.json",
        r#"{"experiment": {"kind": "separation", "quantizer_bits": [6, 8], "pe_trials": 500}, "trials": 300, "seed": 3}"#,
    );
    let v = run_ok("separation", &s, dir.path(), &[]);
    let r = &v["result"];
    for key in ["D_target", "D_noisy", "D_pipe", "stderr_noisy", "stderr_pipe", "excess_bound"] {
        assert!(r[key].is_number(), "{key} missing: {r}");
    }
    assert_eq!(r["points"].as_array().unwrap().len(), 2);
    assert!(v["checks"].is_object());
}

#[test]
fn sweep_csv_and_plotdata() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(
        dir.path(),
        "sweep.json",
        r#"{"experiment": {"kind": "synth-sweep", "layers": [4, 8], "rates": [0.6], "batches": 2}, "trials": 30}"#,
    );
    run_ok("synth-sweep", &s, dir.path(), &[]);
    let csv = std::fs::read_to_string(dir.path().join("synth-sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "N,R,metric_mean,metric_stderr,seed_batch");
    assert_eq!(lines.len(), 5);
    assert!(!csv.contains('\r'));

    let input = dir.path().join("synth-sweep.json");
    let o = sepnet(&["plotdata", "--input", input.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let plot = std::fs::read_to_string(dir.path().join("synth-sweep.plot.csv")).unwrap();
    assert!(plot.starts_with("N,R,tv_mean,tv_stderr,seed_batch\n"));
    assert_eq!(plot.lines().count(), 5);
}

#[test]
fn unknown_subcommand_and_missing_file_fail() {
    assert!(!sepnet(&["bogus"], None).status.success());
    let o = sepnet(&["simulate", "--scenario", "/nonexistent/x.json"], None);
    assert_eq!(o.status.code(), Some(1));
}
