use std::io::Write;
use std::process::{Command, Output, Stdio};

use dynorient::harness::BENCH_HEADER;
use dynorient::trace::Trace;

fn dynorient(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_dynorient"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn dynorient");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn gen(kind: &str, seed: &str) -> Output {
    dynorient(&["gen", "--kind", kind, "--n", "12", "--steps", "200", "--seed", seed, "--query-rate", "0.1"], "")
}

#[test]
fn generated_traces_round_trip() {
    for kind in ["random", "forest-only", "planar-like", "adversarial-path"] {
        let out = gen(kind, "4");
        assert!(out.status.success(), "{kind}");
        let text = stdout(&out);
        let trace: Trace = text.parse().unwrap();
        assert_eq!(trace.to_string(), text, "{kind}");
    }
}

#[test]
fn same_seed_same_bytes() {
    assert_eq!(gen("random", "9").stdout, gen("random", "9").stdout);
    assert_ne!(gen("random", "9").stdout, gen("random", "10").stdout);
}

#[test]
fn unknown_kind_is_a_usage_error() {
    let out = dynorient(&["gen", "--kind", "spiral", "--n", "5"], "");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_trace_benches_to_header_only() {
    let out = dynorient(&["bench", "--mode", "arb", "--n", "4"], "");
    assert!(out.status.success());
    assert_eq!(stdout(&out), format!("{BENCH_HEADER}\n"));
}

#[test]
fn run_answers_queries_as_json() {
    let out = dynorient(&["run", "--mode", "orient", "--verify-every", "1"], "a 0 1\no 0\n");
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["violations"].as_array().unwrap().len(), 0);
    let deg = report["answers"][0]["value"].as_u64().unwrap();
    assert!(deg <= 3, "{deg}");
}

#[test]
fn generated_run_in_every_mode_is_clean() {
    for mode in ["orient", "arb", "bf", "colour-forest", "colour-pseudo"] {
        let out = dynorient(
            &[
                "run", "--mode", mode, "--kind", "random", "--n", "10", "--alpha-max", "2", "--steps", "150",
                "--seed", "2", "--gamma", "8", "--verify-every", "1", "--paranoid",
            ],
            "",
        );
        assert_eq!(out.status.code(), Some(0), "{mode}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn seed_sweep_prints_one_report_per_seed() {
    let out = dynorient(
        &["run", "--mode", "bf", "--kind", "random", "--n", "30", "--alpha-max", "2", "--steps", "200", "--seeds", "3"],
        "",
    );
    assert_eq!(out.status.code(), Some(0));
    let reports: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(reports.len(), 3);
}

#[test]
fn malformed_trace_names_its_line() {
    let out = dynorient(&["run"], "a 0 1\nx 2\n");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(dynorient(&["run", "--mode", "nope"], "").status.code(), Some(2));
    assert_eq!(dynorient(&["run", "--epsilon", "3"], "").status.code(), Some(2));
    assert_eq!(dynorient(&["run", "--mode", "bf"], "a 0 1\n").status.code(), Some(2));
    assert_eq!(dynorient(&["frobnicate"], "").status.code(), Some(2));
}

#[test]
fn understated_arboricity_is_a_violation() {
    // K_13 has arboricity 7, far above the declared 1.
    let mut trace = String::new();
    for u in 0..13 {
        for v in u + 1..13 {
            trace.push_str(&format!("a {u} {v}\n"));
        }
    }
    trace.push_str("k\n");
    let out = dynorient(&["run", "--mode", "orient", "--alpha-max", "1", "--gamma", "8"], &trace);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let v = report["violations"][0].as_str().unwrap();
    assert!(v.starts_with("out-degree"), "{v}");
}
