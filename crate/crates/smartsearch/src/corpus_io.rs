//! Line-delimited JSON corpus files.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde_json::{Map, Value};
use smartsearch_core::corpus::{ArchiveFile, CorpusError, CorpusStore, FileType};
use thiserror::Error;

const KNOWN_KEYS: [&str; 8] =
    ["file_id", "file_type", "topic", "title", "text_repr", "metadata_physical", "metadata_custom", "metadata_ai"];

/// How unknown record keys are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    /// Reject them.
    #[default]
    Strict,
    /// Keep them, as raw JSON, in `ArchiveFile::extra`.
    Lax,
}

#[derive(Debug, Error)]
pub enum CorpusIoError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

fn malformed(line: usize, reason: impl Into<String>) -> CorpusError {
    CorpusError::MalformedRecord { line, reason: reason.into() }
}

/// Parse one record. `line` is 1-based and only used in errors.
pub fn parse_record(text: &str, line: usize, mode: Strictness) -> Result<ArchiveFile, CorpusError> {
    let mut obj: Map<String, Value> = match serde_json::from_str(text) {
        Ok(Value::Object(m)) => m,
        Ok(_) => return Err(malformed(line, "record is not a JSON object")),
        Err(e) => return Err(malformed(line, e.to_string())),
    };
    if let Some(ft) = obj.get("file_type") {
        let s = ft.as_str().ok_or_else(|| malformed(line, "file_type must be a string"))?;
        s.parse::<FileType>()?;
    }
    match obj.get("topic") {
        None | Some(Value::Null) => {
            let file_id = obj.get("file_id").and_then(Value::as_str).unwrap_or("").to_string();
            return Err(CorpusError::MissingTopic { file_id });
        }
        _ => {}
    }
    let unknown: Vec<String> = obj.keys().filter(|k| !KNOWN_KEYS.contains(&k.as_str())).cloned().collect();
    if mode == Strictness::Strict && !unknown.is_empty() {
        return Err(malformed(line, format!("unknown keys {unknown:?} (lax mode keeps them)")));
    }
    let mut extra = std::collections::BTreeMap::new();
    for key in unknown {
        let v = obj.remove(&key).expect("key listed above");
        extra.insert(key, v.to_string());
    }
    let mut file: ArchiveFile =
        serde_json::from_value(Value::Object(obj)).map_err(|e| malformed(line, e.to_string()))?;
    file.extra = extra;
    Ok(file)
}

/// Read a corpus. Blank lines are skipped. With `topics`, every record's
/// topic must belong to that set.
pub fn load_corpus(path: &Path, mode: Strictness, topics: Option<Vec<String>>) -> Result<CorpusStore, CorpusIoError> {
    let io_err = |source| CorpusIoError::Io { path: path.display().to_string(), source };
    let reader = BufReader::new(fs::File::open(path).map_err(io_err)?);
    let mut store = match topics {
        Some(t) => CorpusStore::with_topics(t),
        None => CorpusStore::new(),
    };
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        store.insert(parse_record(&line, i + 1, mode)?)?;
    }
    Ok(store)
}

/// One JSON object per line; extras kept by lax loading are written back
/// as top-level keys.
pub fn record_json(file: &ArchiveFile) -> Value {
    let mut v = serde_json::to_value(file).expect("records serialize");
    let obj = v.as_object_mut().expect("records are objects");
    obj.remove("extra");
    for (k, raw) in &file.extra {
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.clone()));
        obj.insert(k.clone(), value);
    }
    v
}

pub fn write_corpus(path: &Path, store: &CorpusStore) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    for f in store.files() {
        serde_json::to_writer(&mut w, &record_json(f))?;
        w.write_all(b"\n")?;
    }
    w.flush()
}
