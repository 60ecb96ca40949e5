mod support;

use std::path::Path;
use std::process::{Command, Output};

use support::{oracle_dir, strip_timing_columns};

fn smartsearch(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smartsearch"))
        .current_dir(dir)
        .env_remove("SMARTSEARCH_LOG")
        .args(args)
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn failed(out: &Output) -> String {
    assert!(!out.status.success(), "unexpected success: {}", String::from_utf8_lossy(&out.stdout));
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn gen_corpus_reproduces_the_fixture() {
    let dir = tempfile::tempdir().unwrap();
    ok(&smartsearch(dir.path(), &["gen-corpus", "--seed", "7", "--out", "c.jsonl"]));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("c.jsonl")).unwrap(),
        std::fs::read_to_string(oracle_dir().join("corpus_seed7.jsonl")).unwrap()
    );
}

#[test]
fn eval_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&smartsearch(dir.path(), &["eval", "--backend", "mock", "--seed", "7", "--out", "res"]));
    assert!(stdout.contains("average"));
    let res = dir.path().join("res");
    let report = std::fs::read_to_string(res.join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 111);
    assert!(report.lines().next().unwrap().ends_with(",total_ms"));
    assert_eq!(strip_timing_columns(&report), std::fs::read_to_string(oracle_dir().join("golden/report.csv")).unwrap());
    let run: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(res.join("run.json")).unwrap()).unwrap();
    assert_eq!((run["seed"].as_u64(), run["cases"].as_u64()), (Some(7), Some(110)));
}

#[test]
fn sweep_and_ablate_write_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    ok(&smartsearch(dir.path(), &["sweep-alpha", "--alphas", "0,0.5,1", "--out", "res"]));
    let sweep = std::fs::read_to_string(dir.path().join("res/sweep.csv")).unwrap();
    let alphas: Vec<&str> = sweep.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(alphas, ["0.0", "0.5", "1.0"]);

    ok(&smartsearch(dir.path(), &["ablate", "--variants", "no_router", "--queries", "en", "--out", "res"]));
    let ablation = std::fs::read_to_string(dir.path().join("res/ablation.csv")).unwrap();
    let variants: Vec<&str> = ablation.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(variants, ["baseline", "no_router"]);

    let err = failed(&smartsearch(dir.path(), &["sweep-alpha", "--alphas", "1.5", "--out", "res"]));
    assert!(err.contains("alpha 1.5"), "{err}");
}

#[test]
fn ingest_then_query() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("smartsearch.toml"),
        "index_dir = \"idx\"\nurl_template = \"https://a.example/{file_id}\"\n",
    )
    .unwrap();
    let cfg = ["--config", "smartsearch.toml"];

    let err = failed(&smartsearch(dir.path(), &[&cfg[..], &["query", "oceans"]].concat()));
    assert!(err.starts_with("error:"), "{err}");

    let corpus = oracle_dir().join("corpus_seed7.jsonl");
    ok(&smartsearch(dir.path(), &[&cfg[..], &["ingest", "--corpus", corpus.to_str().unwrap()]].concat()));
    assert!(dir.path().join("idx/manifest.json").exists());

    let text =
        ok(&smartsearch(dir.path(), &[&cfg[..], &["query", "Recommend some video files about oceans"]].concat()));
    assert!(text.contains("[file_id: "));
    assert!(text.contains("https://a.example/"));

    let json = ok(&smartsearch(
        dir.path(),
        &[&cfg[..], &["query", "추천해 몇몇 비디오 파일들 관련 바다", "--json", "--alpha", "0.5"]].concat(),
    ));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["language"]["code"], "ko");
    assert_eq!(v["trace"]["params"]["alpha"], 0.5);
    assert!(!v["file_ids"].as_array().unwrap().is_empty());
}

#[test]
fn invalid_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    for (toml, field) in [
        ("[retrieval]\nalpha = 1.5\n", "retrieval.alpha"),
        ("[bm25]\nk1 = -1.0\n", "bm25.k1"),
        ("url_template = \"https://x/\"\n", "url_template"),
        ("colour = \"red\"\n", "colour"),
    ] {
        std::fs::write(dir.path().join("bad.toml"), toml).unwrap();
        let err = failed(&smartsearch(dir.path(), &["--config", "bad.toml", "eval", "--out", "res"]));
        assert!(err.contains(field), "{toml:?} -> {err}");
    }
    let err = failed(&smartsearch(dir.path(), &["--config", "missing.toml", "eval"]));
    assert!(err.contains("missing.toml"), "{err}");
}

#[test]
fn strict_corpus_rejects_unknown_keys_unless_lax() {
    let dir = tempfile::tempdir().unwrap();
    let line =
        r#"{"file_id":"1","file_type":"image","topic":"oceans","title":"Reef","text_repr":"quiet reef","shelf":"B2"}"#;
    std::fs::write(dir.path().join("c.jsonl"), format!("{line}\n")).unwrap();
    let err = failed(&smartsearch(dir.path(), &["ingest", "--corpus", "c.jsonl"]));
    assert!(err.contains("shelf"), "{err}");
    ok(&smartsearch(dir.path(), &["--lax", "ingest", "--corpus", "c.jsonl"]));
}
