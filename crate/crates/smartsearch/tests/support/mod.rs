//! Helpers shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use std::path::PathBuf;

use smartsearch::app::{prepare_bench, run_eval};
use smartsearch::config::AppConfig;
use smartsearch::report::{write_report_csv, write_summary_csv};
use smartsearch_core::eval::QuerySet;
use smartsearch_core::pipeline::QueryOverrides;

pub fn oracle_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/oracle")
}

/// Drop every `*_ms` column from a CSV document.
pub fn strip_timing_columns(csv: &str) -> String {
    let mut lines = csv.lines();
    let Some(header) = lines.next() else { return String::new() };
    let keep: Vec<bool> = header.split(',').map(|c| !c.ends_with("_ms")).collect();
    let mut out = String::new();
    for line in std::iter::once(header).chain(lines) {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(line.as_bytes());
        let rec = rdr.records().next().expect("one record").expect("valid csv");
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(rec.iter().zip(&keep).filter(|(_, k)| **k).map(|(f, _)| f)).unwrap();
        out.push_str(&String::from_utf8(w.into_inner().unwrap()).unwrap());
    }
    out
}

/// report.csv (timing columns stripped) and summary.csv of the English
/// benchmark over `corpus` (or the synthetic corpus of `seed`), mock backend.
pub fn eval_csvs(corpus: Option<PathBuf>, seed: u64) -> (String, String) {
    let cfg = AppConfig::default();
    let (pipeline, queries, run) = prepare_bench(&cfg, corpus, false, seed).unwrap();
    let report = run_eval(&pipeline, &queries, QuerySet::English, &QueryOverrides::default(), &run);
    let mut r = Vec::new();
    write_report_csv(&mut r, &report).unwrap();
    let mut s = Vec::new();
    write_summary_csv(&mut s, &report).unwrap();
    (strip_timing_columns(&String::from_utf8(r).unwrap()), String::from_utf8(s).unwrap())
}
