//! Okapi BM25 over an inverted index of chunks.
//!
//! score(D, Q) = Σ_{t ∈ Q} idf(t) · tf·(k1 + 1) / (tf + k1·(1 − b + b·|D|/avgdl))
//! idf(t)      = ln(1 + (N − df + 0.5) / (df + 0.5))
//!
//! Query terms are de-duplicated (first occurrence order) and summed in that
//! order. The idf form is never negative, so every score is ≥ 0 and exactly 0
//! for a chunk sharing no term with the query.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::chunk::Chunk;
use super::tokenize::tokenize;
use super::{file_id_of, IndexError};
use crate::retrieval::{sort_nodes, ScoredNode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub chunk_id: String,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bm25Index {
    postings: BTreeMap<String, Vec<Posting>>,
    doc_lengths: BTreeMap<String, u32>,
    avg_doc_length: f64,
    params: Bm25Params,
}

impl Bm25Index {
    pub fn build(chunks: &[Chunk], params: Bm25Params) -> Result<Self, IndexError> {
        if chunks.is_empty() {
            return Err(IndexError::EmptyIndexInput);
        }
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut doc_lengths = BTreeMap::new();
        for chunk in chunks {
            let terms = tokenize(&chunk.text);
            let mut tf: BTreeMap<String, u32> = BTreeMap::new();
            for t in &terms {
                *tf.entry(t.clone()).or_insert(0) += 1;
            }
            for (term, count) in tf {
                postings.entry(term).or_default().push(Posting { chunk_id: chunk.chunk_id.clone(), tf: count });
            }
            doc_lengths.insert(chunk.chunk_id.clone(), terms.len() as u32);
        }
        Self::from_parts(postings, doc_lengths, params)
    }

    /// Reassemble an index from stored postings and lengths. The average
    /// length is recomputed so it is always the exact mean.
    pub fn from_parts(
        mut postings: BTreeMap<String, Vec<Posting>>,
        doc_lengths: BTreeMap<String, u32>,
        params: Bm25Params,
    ) -> Result<Self, IndexError> {
        if doc_lengths.is_empty() {
            return Err(IndexError::EmptyIndexInput);
        }
        for list in postings.values_mut() {
            list.sort_by(|a, b| a.chunk_id.cmp(&b.chunk_id));
        }
        let total: u64 = doc_lengths.values().map(|&l| u64::from(l)).sum();
        let avg_doc_length = total as f64 / doc_lengths.len() as f64;
        Ok(Bm25Index { postings, doc_lengths, avg_doc_length, params })
    }

    pub fn postings(&self) -> &BTreeMap<String, Vec<Posting>> {
        &self.postings
    }

    pub fn doc_lengths(&self) -> &BTreeMap<String, u32> {
        &self.doc_lengths
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn doc_count(&self) -> usize {
        self.doc_lengths.len()
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn idf(&self, term: &str) -> f64 {
        let df = self.postings.get(term).map_or(0, Vec::len) as f64;
        let n = self.doc_count() as f64;
        libm::log(1.0 + (n - df + 0.5) / (df + 0.5))
    }

    /// Scores of every chunk sharing at least one term with the query.
    pub fn score_all(&self, query: &str) -> BTreeMap<String, f64> {
        let Bm25Params { k1, b } = self.params;
        let mut scores: BTreeMap<String, f64> = BTreeMap::new();
        let mut seen: Vec<String> = Vec::new();
        for term in tokenize(query) {
            if seen.contains(&term) {
                continue;
            }
            let Some(list) = self.postings.get(&term) else {
                seen.push(term);
                continue;
            };
            let idf = self.idf(&term);
            for p in list {
                let dl = f64::from(self.doc_lengths[&p.chunk_id]);
                let tf = f64::from(p.tf);
                let norm = k1 * (1.0 - b + b * dl / self.avg_doc_length);
                *scores.entry(p.chunk_id.clone()).or_insert(0.0) += idf * (tf * (k1 + 1.0)) / (tf + norm);
            }
            seen.push(term);
        }
        scores
    }
}

/// Top-k chunks by BM25 score; ties by ascending chunk id. Chunks without a
/// query term are never returned.
pub fn bm25_search(index: &Bm25Index, query: &str, k: usize) -> Vec<ScoredNode> {
    let mut nodes: Vec<ScoredNode> = index
        .score_all(query)
        .into_iter()
        .map(|(chunk_id, score)| {
            let mut n = ScoredNode::new(file_id_of(&chunk_id).into(), chunk_id);
            n.bm25_score = Some(score);
            n
        })
        .collect();
    sort_nodes(&mut nodes, |n| n.bm25_score.unwrap_or(0.0));
    nodes.truncate(k);
    nodes
}
