//! On-disk index sets: a directory with `manifest.json`, `chunks.jsonl`, and
//! per filetype `bm25_<type>.json` plus `vectors_<type>.bin`.
//!
//! Vector files are little-endian: the magic `SSVEC001`, u32 dims, u32
//! entry count, then per entry a u32 id length, the UTF-8 id and dims f64
//! values. Scores computed from a loaded index are bit-identical to the
//! original.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use smartsearch_core::corpus::FileType;
use smartsearch_core::indexing::{
    Bm25Index, Bm25Params, Chunk, ChunkParams, EmbeddingVector, IndexError, IndexPair, Posting, TypedIndexSet,
    VectorIndex,
};
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;
const VECTOR_MAGIC: &[u8; 8] = b"SSVEC001";

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("unsupported index format version {found} (this build reads {FORMAT_VERSION})")]
    UnsupportedVersion { found: u32 },
    #[error("{path}: {reason}")]
    Corrupt { path: String, reason: String },
    #[error(transparent)]
    Index(#[from] IndexError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeCounts {
    pub chunks: usize,
    pub terms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub chunk_params: ChunkParams,
    pub bm25_params: Bm25Params,
    pub dims: usize,
    pub embedder: String,
    pub files: usize,
    pub per_type: BTreeMap<FileType, TypeCounts>,
}

#[derive(Serialize, Deserialize)]
struct Bm25File {
    params: Bm25Params,
    doc_lengths: BTreeMap<String, u32>,
    postings: BTreeMap<String, Vec<Posting>>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PersistError + '_ {
    move |source| PersistError::Io { path: path.display().to_string(), source }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PersistError> {
    let f = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer(&mut w, value)
        .map_err(|source| PersistError::Json { path: path.display().to_string(), source })?;
    w.flush().map_err(io_err(path))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, PersistError> {
    let f = fs::File::open(path).map_err(io_err(path))?;
    serde_json::from_reader(BufReader::new(f))
        .map_err(|source| PersistError::Json { path: path.display().to_string(), source })
}

pub fn save_index(dir: &Path, set: &TypedIndexSet, embedder: &str, files: usize) -> Result<Manifest, PersistError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut per_type = BTreeMap::new();
    let mut bm25_params = Bm25Params::default();
    for (ft, pair) in set.per_type() {
        bm25_params = pair.bm25.params();
        let bm25 = Bm25File {
            params: pair.bm25.params(),
            doc_lengths: pair.bm25.doc_lengths().clone(),
            postings: pair.bm25.postings().clone(),
        };
        write_json(&dir.join(format!("bm25_{ft}.json")), &bm25)?;
        write_vectors(&dir.join(format!("vectors_{ft}.bin")), &pair.vectors)?;
        per_type.insert(*ft, TypeCounts { chunks: pair.bm25.doc_count(), terms: pair.bm25.postings().len() });
    }
    let chunks_path = dir.join("chunks.jsonl");
    let mut w = BufWriter::new(fs::File::create(&chunks_path).map_err(io_err(&chunks_path))?);
    for c in set.chunks() {
        let line = serde_json::to_string(c).expect("chunks serialize");
        writeln!(w, "{line}").map_err(io_err(&chunks_path))?;
    }
    w.flush().map_err(io_err(&chunks_path))?;
    let manifest = Manifest {
        version: FORMAT_VERSION,
        chunk_params: set.chunk_params(),
        bm25_params,
        dims: set.dims(),
        embedder: embedder.to_string(),
        files,
        per_type,
    };
    // the manifest goes last so a partial write never looks complete
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, PersistError> {
    let raw: serde_json::Value = read_json(&dir.join("manifest.json"))?;
    let found = raw.get("version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
    if found != FORMAT_VERSION {
        return Err(PersistError::UnsupportedVersion { found });
    }
    let path = dir.join("manifest.json");
    serde_json::from_value(raw).map_err(|source| PersistError::Json { path: path.display().to_string(), source })
}

pub fn load_index(dir: &Path) -> Result<(TypedIndexSet, Manifest), PersistError> {
    let manifest = read_manifest(dir)?;
    let mut per_type = BTreeMap::new();
    for (ft, counts) in &manifest.per_type {
        let bm25_path = dir.join(format!("bm25_{ft}.json"));
        let f: Bm25File = read_json(&bm25_path)?;
        let bm25 = Bm25Index::from_parts(f.postings, f.doc_lengths, f.params)?;
        let vectors = read_vectors(&dir.join(format!("vectors_{ft}.bin")))?;
        if bm25.doc_count() != counts.chunks || vectors.len() != counts.chunks || vectors.dims() != manifest.dims {
            return Err(PersistError::Corrupt {
                path: dir.display().to_string(),
                reason: format!("{ft} index does not match the manifest counts"),
            });
        }
        per_type.insert(*ft, IndexPair { bm25, vectors });
    }
    let chunks_path = dir.join("chunks.jsonl");
    let reader = BufReader::new(fs::File::open(&chunks_path).map_err(io_err(&chunks_path))?);
    let mut chunks = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(io_err(&chunks_path))?;
        if line.trim().is_empty() {
            continue;
        }
        let c: Chunk = serde_json::from_str(&line)
            .map_err(|source| PersistError::Json { path: chunks_path.display().to_string(), source })?;
        chunks.push(c);
    }
    let set = TypedIndexSet::from_parts(per_type, chunks, manifest.chunk_params)?;
    Ok((set, manifest))
}

fn write_vectors(path: &Path, index: &VectorIndex) -> Result<(), PersistError> {
    let mut w = BufWriter::new(fs::File::create(path).map_err(io_err(path))?);
    let mut buf = Vec::new();
    buf.extend_from_slice(VECTOR_MAGIC);
    buf.extend_from_slice(&(index.dims() as u32).to_le_bytes());
    buf.extend_from_slice(&(index.len() as u32).to_le_bytes());
    for (id, v) in index.entries() {
        buf.extend_from_slice(&(id.len() as u32).to_le_bytes());
        buf.extend_from_slice(id.as_bytes());
        for x in &v.0 {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    w.write_all(&buf).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

fn read_vectors(path: &Path) -> Result<VectorIndex, PersistError> {
    let mut bytes = Vec::new();
    fs::File::open(path).and_then(|mut f| f.read_to_end(&mut bytes)).map_err(io_err(path))?;
    let corrupt = |reason: &str| PersistError::Corrupt { path: path.display().to_string(), reason: reason.to_string() };
    let mut cur = bytes.as_slice();
    let mut take = |n: usize| -> Result<&[u8], PersistError> {
        if cur.len() < n {
            return Err(corrupt("truncated vector file"));
        }
        let (head, tail) = cur.split_at(n);
        cur = tail;
        Ok(head)
    };
    if take(8)? != VECTOR_MAGIC {
        return Err(corrupt("bad magic"));
    }
    let u32_at = |b: &[u8]| u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize;
    let dims = u32_at(take(4)?);
    let count = u32_at(take(4)?);
    let mut index = VectorIndex::new(dims);
    for _ in 0..count {
        let len = u32_at(take(4)?);
        let id = std::str::from_utf8(take(len)?).map_err(|_| corrupt("chunk id is not UTF-8"))?.to_string();
        let raw = take(dims * 8)?;
        let values = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        index.insert(id, EmbeddingVector(values))?;
    }
    if !cur.is_empty() {
        return Err(corrupt("trailing bytes"));
    }
    Ok(index)
}
