//! End-to-end checks of the command-line surface.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_causal-zigzag"))
}

fn run_ok(args: &[&str], dir: &Path) -> Output {
    let out = bin().args(args).current_dir(dir).output().expect("spawn");
    assert!(
        out.status.success(),
        "{:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn sample_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &str| {
        vec![
            "sample".to_string(),
            "--kind".into(),
            "zigzag".into(),
            "--uniform".into(),
            "--n".into(),
            "8".into(),
            "--jumps".into(),
            "500".into(),
            "--seed".into(),
            "7".into(),
            "--stride".into(),
            "10".into(),
            "--out".into(),
            out.into(),
        ]
    };
    for out in ["a.jsonl", "b.jsonl"] {
        let list = args(out);
        let refs: Vec<&str> = list.iter().map(String::as_str).collect();
        run_ok(&refs, dir.path());
    }
    let a = std::fs::read(dir.path().join("a.jsonl")).unwrap();
    let b = std::fs::read(dir.path().join("b.jsonl")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn count_empty_graph_and_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty4.txt"), "a\nb\nc\nd\n").unwrap();
    let out = run_ok(&["count", "empty4.txt"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["insert_total"], "12");
    assert_eq!(v["delete_total"], "0");

    // a lone directed edge is not a completed CPDAG
    std::fs::write(dir.path().join("bad.txt"), "a -> b\n").unwrap();
    let out = bin()
        .args(["count", "bad.txt"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn enumerate_reports_the_census() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(&["enumerate", "4"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["classes"], 185);
    assert_eq!(v["dags"], 543);
}

#[test]
fn verify_small_is_green() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(&["verify", "--max-n", "3"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["ok"], true);
    assert_eq!(v["census"][2]["classes"], 11);
    assert!(v["stationarity"]["zanella_residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    // no stop criterion
    let out = bin()
        .args(["sample", "--uniform", "--n", "4", "--out", "t.jsonl"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // both uniform and synthetic data
    let out = bin()
        .args([
            "sample",
            "--uniform",
            "--synthetic-vars",
            "4",
            "--jumps",
            "10",
            "--out",
            "t.jsonl",
        ])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // unknown flag (clap)
    let out = bin()
        .args(["sample", "--frobnicate"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn multi_chain_writes_one_trace_each() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        &[
            "sample", "--kind", "zanella", "--uniform", "--n", "5", "--jumps", "50", "--seed",
            "3", "--chains", "2", "--out", "t.jsonl",
        ],
        dir.path(),
    );
    assert!(dir.path().join("t.chain0.jsonl").exists());
    assert!(dir.path().join("t.chain1.jsonl").exists());
}

#[test]
fn scored_sampling_summarize_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        &[
            "sample",
            "--kind",
            "zigzag",
            "--synthetic-vars",
            "5",
            "--synthetic-samples",
            "2000",
            "--synthetic-seed",
            "4",
            "--beta",
            "1.0",
            "--jumps",
            "300",
            "--seed",
            "5",
            "--stride",
            "1",
            "--out",
            "t.jsonl",
        ],
        dir.path(),
    );
    let out = run_ok(
        &["summarize", "t.jsonl", "--top", "5", "--burn-in", "0.5"],
        dir.path(),
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["jumps"], 300);
    assert!((v["known_fraction"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let occs: Vec<f64> = v["top"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["occupation"].as_f64().unwrap())
        .collect();
    assert!(!occs.is_empty());
    assert!(occs.windows(2).all(|w| w[0] >= w[1]), "sorted by occupation");
    assert!(occs.iter().sum::<f64>() <= 1.0 + 1e-9);
}

#[test]
fn ges_writes_a_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(
        &[
            "ges",
            "--synthetic-vars",
            "6",
            "--synthetic-samples",
            "5000",
            "--synthetic-seed",
            "9",
            "--out",
            "traj.jsonl",
        ],
        dir.path(),
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("final score"));
    let text = std::fs::read_to_string(dir.path().join("traj.jsonl")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines.len() >= 2);
    let header: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(header["mode"], "ges");
    for line in &lines[1..lines.len() - 1] {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["phase"] == "forward" || v["phase"] == "backward");
    }
    let end: serde_json::Value = serde_json::from_str(lines[lines.len() - 1]).unwrap();
    assert!(end["final_score"].is_f64());
}

#[test]
fn start_graph_vertices_are_matched_to_data_by_name() {
    let dir = tempfile::tempdir().unwrap();
    // file declares z before x; the data columns are x, z
    std::fs::write(dir.path().join("start.txt"), "z -- x\n").unwrap();
    std::fs::write(
        dir.path().join("d.csv"),
        "x,z\n1.0,2.0\n2.0,1.0\n0.5,0.25\n1.5,2.5\n",
    )
    .unwrap();
    run_ok(
        &[
            "sample", "--csv", "d.csv", "--start", "start.txt", "--jumps", "0", "--seed", "1",
            "--out", "t.jsonl",
        ],
        dir.path(),
    );
    let text = std::fs::read_to_string(dir.path().join("t.jsonl")).unwrap();
    let init: serde_json::Value = serde_json::from_str(text.lines().nth(1).unwrap()).unwrap();
    assert_eq!(init["edges"], 1);
    assert!(init["graph"].as_str().unwrap().contains("x -- z"));

    // unknown vertex name is a usage error
    std::fs::write(dir.path().join("bad.txt"), "q -- x\n").unwrap();
    let out = bin()
        .args([
            "sample", "--csv", "d.csv", "--start", "bad.txt", "--jumps", "0", "--seed", "1",
            "--out", "t.jsonl",
        ])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn start_graph_and_direction_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("start.txt"), "a -- b\nb -- c\nc\nd\n").unwrap();
    let out = run_ok(
        &[
            "sample",
            "--kind",
            "zigzag",
            "--uniform",
            "--start",
            "start.txt",
            "--direction",
            "-1",
            "--jumps",
            "20",
            "--seed",
            "1",
            "--out",
            "t.jsonl",
        ],
        dir.path(),
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("20 jumps"));
    let text = std::fs::read_to_string(dir.path().join("t.jsonl")).unwrap();
    let first_event: serde_json::Value =
        serde_json::from_str(text.lines().nth(1).unwrap()).unwrap();
    assert_eq!(first_event["kind"], "init");
    assert_eq!(first_event["dir"], -1);
    assert_eq!(first_event["edges"], 2);
}
