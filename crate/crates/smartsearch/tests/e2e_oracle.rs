//! The end-to-end run on the fixture corpus against the independent Python
//! oracle's frozen output in tests/oracle/golden.

mod support;

use std::process::Command;

use support::{eval_csvs, oracle_dir, strip_timing_columns};

#[test]
fn matches_frozen_oracle_output() {
    let (report, summary) = eval_csvs(Some(oracle_dir().join("corpus_seed7.jsonl")), 7);
    let golden = oracle_dir().join("golden");
    assert_eq!(report, std::fs::read_to_string(golden.join("report.csv")).unwrap());
    assert_eq!(summary, std::fs::read_to_string(golden.join("summary.csv")).unwrap());
}

#[test]
fn synthetic_seed_matches_fixture() {
    let from_file = eval_csvs(Some(oracle_dir().join("corpus_seed7.jsonl")), 7);
    let synthetic = eval_csvs(None, 7);
    assert_eq!(from_file, synthetic);
}

#[test]
fn timing_columns_are_stripped() {
    let csv = "a,b_ms,c\n1,2.000,\"x,y\"\n";
    assert_eq!(strip_timing_columns(csv), "a,c\n1,\"x,y\"\n");
}

/// Re-runs the Python oracle when python3 is on the path.
#[test]
fn live_oracle_agrees() {
    let Ok(out) = Command::new("python3").arg("--version").output() else { return };
    if !out.status.success() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new("python3")
        .arg(oracle_dir().join("e2e_oracle.py"))
        .arg(oracle_dir().join("corpus_seed7.jsonl"))
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let (report, summary) = eval_csvs(Some(oracle_dir().join("corpus_seed7.jsonl")), 7);
    assert_eq!(report, std::fs::read_to_string(dir.path().join("report.csv")).unwrap());
    assert_eq!(summary, std::fs::read_to_string(dir.path().join("summary.csv")).unwrap());
}
