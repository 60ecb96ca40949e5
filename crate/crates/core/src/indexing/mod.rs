//! Chunking, embedding and the two per-filetype retrieval indices.

mod bm25;
mod chunk;
mod tokenize;
mod typed;
mod vector;

pub use bm25::{bm25_search, Bm25Index, Bm25Params, Posting};
pub use chunk::{chunk_text, Chunk, ChunkParams};
pub use tokenize::{tokenize, tokenize_spans};
pub use typed::{build_typed_indices, IndexPair, TypedIndexSet};
pub use vector::{cosine_similarity, embed, vector_search, EmbeddingVector, VectorIndex};

use alloc::string::String;

use thiserror::Error;

use crate::providers::ProviderError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndexError {
    #[error("invalid chunk parameters: chunk_size {chunk_size} must exceed overlap {overlap}")]
    InvalidChunkParams { chunk_size: usize, overlap: usize },
    #[error("cannot build an index from no input")]
    EmptyIndexInput,
    #[error("dimension mismatch: index has {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("chunk {0} appears in more than one index")]
    DuplicateChunk(String),
    #[error("embedding contains non-finite values")]
    NonFiniteEmbedding,
    #[error("provider error: {0}")]
    Provider(#[from] ProviderError),
}

/// Chunk ids are `<file_id>#<ordinal>`.
pub fn file_id_of(chunk_id: &str) -> &str {
    match chunk_id.rfind('#') {
        Some(i) => &chunk_id[..i],
        None => chunk_id,
    }
}
