use std::fs;
use std::path::PathBuf;

use smartsearch::corpus_io::{load_corpus, parse_record, write_corpus, CorpusIoError, Strictness};
use smartsearch_core::corpus::{CorpusError, FileType};
use smartsearch_core::eval::{generate_corpus, DEFAULT_TOPICS};

const GOOD: &str = r#"{"file_id":"5138120512","file_type":"image","topic":"wildlife","title":"Golden lions","text_repr":"Lions at dusk.","metadata_physical":{"format":"jpeg"}}"#;

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/oracle/corpus_seed7.jsonl")
}

#[test]
fn strict_record_parses() {
    let f = parse_record(GOOD, 1, Strictness::Strict).unwrap();
    assert_eq!(f.file_type, FileType::Image);
    assert_eq!(f.metadata_physical["format"], "jpeg");
    assert!(f.metadata_ai.is_empty() && f.extra.is_empty());
}

#[test]
fn unknown_keys_rejected_or_kept() {
    let rec = GOOD.replace("}}", r#"},"shelf":{"row":3},"box":"B-12"}"#);
    match parse_record(&rec, 4, Strictness::Strict) {
        Err(CorpusError::MalformedRecord { line: 4, reason }) => assert!(reason.contains("shelf"), "{reason}"),
        other => panic!("{other:?}"),
    }
    let f = parse_record(&rec, 4, Strictness::Lax).unwrap();
    assert_eq!(f.extra["shelf"], r#"{"row":3}"#);
    assert_eq!(f.extra["box"], r#""B-12""#);
}

#[test]
fn bad_records() {
    let cases = [
        ("not json", "malformed"),
        ("[1,2]", "not a JSON object"),
        (r#"{"file_id":"1","file_type":"podcast","topic":"x","title":"t"}"#, "podcast"),
        (r#"{"file_id":"1","file_type":"image","title":"t"}"#, "no topic"),
        (r#"{"file_id":"1","file_type":"image","topic":"x"}"#, "title"),
    ];
    for (text, needle) in cases {
        let e = parse_record(text, 1, Strictness::Lax).unwrap_err().to_string();
        assert!(e.contains(needle), "{text}: {e}");
    }
}

#[test]
fn lax_round_trip_preserves_extras() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("in.jsonl");
    let rec = GOOD.replace("}}", r#"},"shelf":{"row":3}}"#);
    fs::write(&src, format!("{rec}\n\n{}\n", GOOD.replace("5138120512", "1466458735"))).unwrap();
    let store = load_corpus(&src, Strictness::Lax, None).unwrap();
    assert_eq!(store.len(), 2);
    let out = dir.path().join("nested/out.jsonl");
    write_corpus(&out, &store).unwrap();
    let again = load_corpus(&out, Strictness::Lax, None).unwrap();
    assert_eq!(again, store);
    assert!(load_corpus(&out, Strictness::Strict, None).is_err());
}

#[test]
fn duplicates_and_closed_topics() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("dup.jsonl");
    fs::write(&src, format!("{GOOD}\n{GOOD}\n")).unwrap();
    match load_corpus(&src, Strictness::Strict, None) {
        Err(CorpusIoError::Corpus(CorpusError::DuplicateFileId(id))) => assert_eq!(id, "5138120512"),
        other => panic!("{other:?}"),
    }
    let one = dir.path().join("one.jsonl");
    fs::write(&one, GOOD).unwrap();
    let e = load_corpus(&one, Strictness::Strict, Some(vec!["oceans".into()])).unwrap_err();
    assert!(matches!(e, CorpusIoError::Corpus(CorpusError::UnknownTopic { .. })), "{e}");
    let e = load_corpus(&dir.path().join("missing.jsonl"), Strictness::Strict, None).unwrap_err();
    assert!(e.to_string().contains("missing.jsonl"));
}

#[test]
fn oracle_fixture_is_the_seed_seven_corpus() {
    let topics: Vec<String> = DEFAULT_TOPICS.iter().map(|t| t.to_string()).collect();
    let generated = generate_corpus(&topics, 3, 7);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.jsonl");
    write_corpus(&out, &generated).unwrap();
    assert_eq!(fs::read_to_string(out).unwrap(), fs::read_to_string(fixture()).unwrap());
    assert_eq!(load_corpus(&fixture(), Strictness::Strict, Some(topics)).unwrap(), generated);
}
