use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::bm25::{Bm25Index, Bm25Params};
use super::chunk::{chunk_text, Chunk, ChunkParams};
use super::vector::{embed, VectorIndex};
use super::IndexError;
use crate::corpus::{CorpusStore, FileType};
use crate::providers::EmbeddingProvider;

/// The lexical and dense index over one set of chunks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexPair {
    pub bm25: Bm25Index,
    pub vectors: VectorIndex,
}

/// One index pair per file type present in the corpus, plus a merged pair
/// spanning all types (used when routing is ablated).
#[derive(Debug, Clone, PartialEq)]
pub struct TypedIndexSet {
    per_type: BTreeMap<FileType, IndexPair>,
    chunk_lookup: BTreeMap<String, Chunk>,
    chunk_types: BTreeMap<String, FileType>,
    merged: IndexPair,
    chunk_params: ChunkParams,
}

impl TypedIndexSet {
    /// Assemble from per-type pairs and their chunks, rebuilding the merged
    /// pair. Every chunk must belong to exactly one per-type pair.
    pub fn from_parts(
        per_type: BTreeMap<FileType, IndexPair>,
        chunks: Vec<Chunk>,
        chunk_params: ChunkParams,
    ) -> Result<Self, IndexError> {
        let Some(first) = per_type.values().next() else {
            return Err(IndexError::EmptyIndexInput);
        };
        let dims = first.vectors.dims();
        let mut chunk_types = BTreeMap::new();
        let mut merged_vectors = VectorIndex::new(dims);
        for (&ft, pair) in &per_type {
            if pair.vectors.dims() != dims {
                return Err(IndexError::DimensionMismatch { expected: dims, got: pair.vectors.dims() });
            }
            for (id, v) in pair.vectors.entries() {
                if chunk_types.insert(id.clone(), ft).is_some() {
                    return Err(IndexError::DuplicateChunk(id.clone()));
                }
                merged_vectors.insert(id.clone(), v.clone())?;
            }
        }
        let chunk_lookup: BTreeMap<String, Chunk> = chunks.into_iter().map(|c| (c.chunk_id.clone(), c)).collect();
        let ordered: Vec<Chunk> = chunk_lookup.values().cloned().collect();
        let params = first.bm25.params();
        let merged = IndexPair { bm25: Bm25Index::build(&ordered, params)?, vectors: merged_vectors };
        Ok(TypedIndexSet { per_type, chunk_lookup, chunk_types, merged, chunk_params })
    }

    pub fn get(&self, ft: FileType) -> Option<&IndexPair> {
        self.per_type.get(&ft)
    }

    pub fn per_type(&self) -> &BTreeMap<FileType, IndexPair> {
        &self.per_type
    }

    pub fn merged(&self) -> &IndexPair {
        &self.merged
    }

    pub fn chunk(&self, chunk_id: &str) -> Option<&Chunk> {
        self.chunk_lookup.get(chunk_id)
    }

    pub fn chunks(&self) -> impl Iterator<Item = &Chunk> {
        self.chunk_lookup.values()
    }

    pub fn chunk_type(&self, chunk_id: &str) -> Option<FileType> {
        self.chunk_types.get(chunk_id).copied()
    }

    pub fn chunk_params(&self) -> ChunkParams {
        self.chunk_params
    }

    pub fn dims(&self) -> usize {
        self.merged.vectors.dims()
    }
}

/// Chunk every file, embed every chunk and build one index pair per file
/// type. Embeddings are computed in corpus order.
pub fn build_typed_indices(
    corpus: &CorpusStore,
    chunk_params: ChunkParams,
    bm25_params: Bm25Params,
    embedder: &dyn EmbeddingProvider,
) -> Result<TypedIndexSet, IndexError> {
    if corpus.is_empty() {
        return Err(IndexError::EmptyIndexInput);
    }
    chunk_params.validate()?;
    let mut by_type: BTreeMap<FileType, Vec<Chunk>> = BTreeMap::new();
    for file in corpus.files() {
        let chunks = chunk_text(&file.file_id, &file.text_repr, chunk_params)?;
        by_type.entry(file.file_type).or_default().extend(chunks);
    }
    let dims = embedder.dims();
    let mut per_type = BTreeMap::new();
    let mut all_chunks = Vec::new();
    for (ft, chunks) in by_type {
        if chunks.is_empty() {
            continue;
        }
        let bm25 = Bm25Index::build(&chunks, bm25_params)?;
        let mut vectors = VectorIndex::new(dims);
        for c in &chunks {
            vectors.insert(c.chunk_id.clone(), embed(&c.text, embedder)?)?;
        }
        per_type.insert(ft, IndexPair { bm25, vectors });
        all_chunks.extend(chunks);
    }
    TypedIndexSet::from_parts(per_type, all_chunks, chunk_params)
}
