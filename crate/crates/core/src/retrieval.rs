//! Hybrid retriever: alpha-weighted fusion of BM25 and vector scores.
//!
//! hybrid = alpha · vector_norm + (1 − alpha) · bm25_norm
//!
//! Branch scores live on different scales, so each branch is min-max
//! normalized over the union of both candidate lists before fusion. A node
//! missing from a branch enters that branch's pool with raw score 0, the
//! floor of both scorers, which keeps the alpha endpoints equal to the
//! single-branch rankings.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::indexing::{bm25_search, embed, tokenize, vector_search, EmbeddingVector, IndexError, IndexPair};
use crate::providers::EmbeddingProvider;

/// A retrieved chunk with every score computed for it along the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredNode {
    pub chunk_id: String,
    pub file_id: String,
    pub bm25_score: Option<f64>,
    pub vector_score: Option<f64>,
    pub bm25_norm: Option<f64>,
    pub vector_norm: Option<f64>,
    pub hybrid_score: Option<f64>,
    pub rerank_score: Option<f64>,
}

impl ScoredNode {
    pub fn new(file_id: String, chunk_id: String) -> Self {
        ScoredNode {
            chunk_id,
            file_id,
            bm25_score: None,
            vector_score: None,
            bm25_norm: None,
            vector_norm: None,
            hybrid_score: None,
            rerank_score: None,
        }
    }

    /// Current relevance: rerank score when present, else hybrid score.
    pub fn relevance(&self) -> f64 {
        self.rerank_score.or(self.hybrid_score).unwrap_or(0.0)
    }
}

/// Sort by `key` descending, ties by ascending chunk id. Adding 0.0 folds
/// -0.0 into 0.0 so that the two compare as the tie they are.
pub fn sort_nodes<F: Fn(&ScoredNode) -> f64>(nodes: &mut [ScoredNode], key: F) {
    nodes.sort_by(|a, b| match (key(b) + 0.0).total_cmp(&(key(a) + 0.0)) {
        Ordering::Equal => a.chunk_id.cmp(&b.chunk_id),
        o => o,
    });
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetrievalParams {
    pub alpha: f64,
    pub top_k_per_branch: usize,
    pub final_k: usize,
}

impl Default for RetrievalParams {
    fn default() -> Self {
        RetrievalParams { alpha: 0.8, top_k_per_branch: 10, final_k: 10 }
    }
}

impl RetrievalParams {
    pub fn validate(&self) -> Result<(), RetrievalError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(RetrievalError::InvalidParams("alpha must lie in [0, 1]"));
        }
        if self.top_k_per_branch == 0 {
            return Err(RetrievalError::InvalidParams("top_k_per_branch must be at least 1"));
        }
        if self.final_k == 0 {
            return Err(RetrievalError::InvalidParams("final_k must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Bm25,
    Vector,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RetrievalError {
    #[error("no node carries a {0:?} score")]
    NoScoresForBranch(Branch),
    #[error("invalid retrieval parameters: {0}")]
    InvalidParams(&'static str),
    #[error(transparent)]
    Index(#[from] IndexError),
}

/// Min-max normalize one branch over the whole node pool: (s − min)/(max − min),
/// all 1.0 when max = min. Nodes without the branch score count as raw 0.
pub fn normalize_scores(nodes: &mut [ScoredNode], branch: Branch) -> Result<(), RetrievalError> {
    let raw = |n: &ScoredNode| match branch {
        Branch::Bm25 => n.bm25_score,
        Branch::Vector => n.vector_score,
    };
    if !nodes.iter().any(|n| raw(n).is_some()) {
        return Err(RetrievalError::NoScoresForBranch(branch));
    }
    let values: Vec<f64> = nodes.iter().map(|n| raw(n).unwrap_or(0.0)).collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for (n, v) in nodes.iter_mut().zip(values) {
        let norm = if max == min { 1.0 } else { (v - min) / (max - min) };
        match branch {
            Branch::Bm25 => n.bm25_norm = Some(norm),
            Branch::Vector => n.vector_norm = Some(norm),
        }
    }
    Ok(())
}

/// Clamped to 1.0: `a + (1 − a)` can round one ulp above it.
pub fn hybrid_score(alpha: f64, vector_norm: f64, bm25_norm: f64) -> f64 {
    (alpha * vector_norm + (1.0 - alpha) * bm25_norm).min(1.0)
}

/// Union the two branch lists (keyed by chunk id), normalize both branches
/// over the union, score, sort and truncate to `final_k`.
pub fn fuse(bm25_hits: Vec<ScoredNode>, vector_hits: Vec<ScoredNode>, params: &RetrievalParams) -> Vec<ScoredNode> {
    let mut pool: BTreeMap<String, ScoredNode> = BTreeMap::new();
    for n in bm25_hits {
        pool.insert(n.chunk_id.clone(), n);
    }
    for n in vector_hits {
        pool.entry(n.chunk_id.clone()).and_modify(|e| e.vector_score = n.vector_score).or_insert(n);
    }
    let mut nodes: Vec<ScoredNode> = pool.into_values().collect();
    if nodes.is_empty() {
        return nodes;
    }
    for branch in [Branch::Bm25, Branch::Vector] {
        if normalize_scores(&mut nodes, branch).is_err() {
            // branch returned nothing: every node contributes 0 for it
            for n in nodes.iter_mut() {
                match branch {
                    Branch::Bm25 => n.bm25_norm = Some(0.0),
                    Branch::Vector => n.vector_norm = Some(0.0),
                }
            }
        }
    }
    for n in nodes.iter_mut() {
        n.hybrid_score = Some(hybrid_score(params.alpha, n.vector_norm.unwrap_or(0.0), n.bm25_norm.unwrap_or(0.0)));
    }
    sort_nodes(&mut nodes, |n| n.hybrid_score.unwrap_or(0.0));
    nodes.truncate(params.final_k);
    nodes
}

/// Both branch searches over one index pair with a precomputed query vector.
pub fn hybrid_retrieve_with_vector(
    query: &str,
    query_vec: &EmbeddingVector,
    pair: &IndexPair,
    params: &RetrievalParams,
) -> Result<BranchOutput, RetrievalError> {
    params.validate()?;
    let bm25_hits = bm25_search(&pair.bm25, query, params.top_k_per_branch);
    let vector_hits = vector_search(&pair.vectors, query_vec, params.top_k_per_branch)?;
    let bm25_count = bm25_hits.len();
    let vector_count = vector_hits.len();
    let nodes = fuse(bm25_hits, vector_hits, params);
    Ok(BranchOutput { nodes, bm25_count, vector_count })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchOutput {
    pub nodes: Vec<ScoredNode>,
    pub bm25_count: usize,
    pub vector_count: usize,
}

/// Embed the query, run both branches, fuse.
pub fn hybrid_retrieve(
    query: &str,
    pair: &IndexPair,
    params: &RetrievalParams,
    embedder: &dyn EmbeddingProvider,
) -> Result<Vec<ScoredNode>, RetrievalError> {
    params.validate()?;
    let qv = embed_query(query, embedder)?;
    Ok(hybrid_retrieve_with_vector(query, &qv, pair, params)?.nodes)
}

/// Query embedding; a query without any term embeds to the zero vector so it
/// still flows through the vector branch (every cosine is 0).
pub fn embed_query(query: &str, embedder: &dyn EmbeddingProvider) -> Result<EmbeddingVector, RetrievalError> {
    if tokenize(query).is_empty() {
        return Ok(EmbeddingVector(alloc::vec![0.0; embedder.dims()]));
    }
    Ok(embed(query, embedder)?)
}
