use std::io::Write;
use std::process::{Command, Output};

fn ws1s(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ws1s"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn formula_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn decide(text: &str, extra: &[&str]) -> Output {
    let f = formula_file(text);
    let mut args = vec!["decide", "--formula-file", f.path().to_str().unwrap()];
    args.extend_from_slice(extra);
    ws1s(&args)
}

#[test]
fn exit_codes_follow_verdicts() {
    assert_eq!(decide("all2 X: X sub X", &[]).status.code(), Some(0));
    assert_eq!(decide("ex2 X: sing X & X sub Y", &[]).status.code(), Some(1));
    let sat = decide("ex2 X: sing X & X sub Y", &["--task", "satisfiability"]);
    assert_eq!(sat.status.code(), Some(0));
    assert_eq!(decide("all2 X: (", &[]).status.code(), Some(2));
    assert_eq!(ws1s(&["decide", "--formula-file", "/nonexistent/formula"]).status.code(), Some(2));
    assert_eq!(ws1s(&["decide", "--bogus"]).status.code(), Some(2));
    assert_eq!(ws1s(&["decide", "--family", "chain", "--n", "2", "--k", "5"]).status.code(), Some(2));
}

#[test]
fn budget_exhaustion_is_reported() {
    let out = ws1s(&["decide", "--family", "chain", "--n", "4", "--k", "3", "--mode", "antichain", "--budget", "5"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn json_report_has_both_verdicts() {
    let out = decide("all2 X: ex2 Y: X sub Y & ~Y sub X", &["--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["classical_verdict"], true);
    assert_eq!(v["antichain_verdict"], true);
    assert_eq!(v["disagreement"], false);
    assert!(v["antichain_term_nodes"].as_u64().unwrap() > 0);
}

#[test]
fn trace_lists_fixpoints() {
    let out = ws1s(&["decide", "--family", "chain", "--n", "3", "--k", "2", "--mode", "antichain", "--trace"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("F0♯ = "));
    assert!(text.contains("N1♯ round 1 = "));
    assert!(text.contains("antichain: valid"));
}

#[test]
fn corpus_sample_agrees() {
    let out = ws1s(&["corpus", "--max-connectives", "1", "--sample", "200", "--seed", "3", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["instances"], 200);
    assert_eq!(v["disagreements"], 0);
}
