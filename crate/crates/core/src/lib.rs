//! Core of the archive smart-search engine.
//!
//! Everything in this crate is pure computation over in-memory data and only
//! needs `alloc`: tokenization and chunking, the BM25 and flat vector indices,
//! alpha-weighted hybrid fusion, per-filetype routing, query/response
//! translation with citation masking, reranking and long-context reordering,
//! response synthesis with file-ID extraction, deterministic provider mocks,
//! the end-to-end pipeline and the evaluation harness.
//!
//! File formats, HTTP backends, the service and the CLI live in the
//! `smartsearch` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod eval;
pub mod indexing;
pub mod language;
pub mod pipeline;
pub mod postprocess;
pub mod providers;
pub mod retrieval;
pub mod routing;
pub mod synthesis;

pub use corpus::{ArchiveFile, CorpusError, CorpusStore, FileType};
pub use indexing::{Chunk, EmbeddingVector, IndexError, TypedIndexSet};
pub use pipeline::{Ablation, Pipeline, PipelineConfig, QueryOverrides, QueryTrace};
pub use providers::ProviderError;
pub use retrieval::{RetrievalParams, ScoredNode};
