//! Exact (flat scan) cosine search.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{file_id_of, IndexError};
use crate::providers::{EmbeddingProvider, ProviderError};
use crate::retrieval::{sort_nodes, ScoredNode};

/// Dense representation of a piece of text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector(pub Vec<f64>);

impl EmbeddingVector {
    pub fn dims(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.0.iter().map(|v| v * v).sum())
    }
}

/// dot(a, b) / (|a|·|b|), summed in dimension order; 0 when either vector is zero.
pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> f64 {
    let dot: f64 = a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum();
    let denom = a.norm() * b.norm();
    if denom == 0.0 {
        0.0
    } else {
        dot / denom
    }
}

/// Embed non-empty text and check the provider returned a finite vector.
pub fn embed(text: &str, provider: &dyn EmbeddingProvider) -> Result<EmbeddingVector, IndexError> {
    if text.trim().is_empty() {
        return Err(ProviderError::EmptyInput.into());
    }
    let v = provider.embed(text)?;
    if !v.is_finite() {
        return Err(IndexError::NonFiniteEmbedding);
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorIndex {
    entries: BTreeMap<String, EmbeddingVector>,
    dims: usize,
}

impl VectorIndex {
    pub fn new(dims: usize) -> Self {
        VectorIndex { entries: BTreeMap::new(), dims }
    }

    pub fn insert(&mut self, chunk_id: impl Into<String>, v: EmbeddingVector) -> Result<(), IndexError> {
        if v.dims() != self.dims {
            return Err(IndexError::DimensionMismatch { expected: self.dims, got: v.dims() });
        }
        if !v.is_finite() {
            return Err(IndexError::NonFiniteEmbedding);
        }
        self.entries.insert(chunk_id.into(), v);
        Ok(())
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &BTreeMap<String, EmbeddingVector> {
        &self.entries
    }

    pub fn get(&self, chunk_id: &str) -> Option<&EmbeddingVector> {
        self.entries.get(chunk_id)
    }
}

/// Top-k entries by cosine similarity; ties by ascending chunk id. Every
/// entry is a candidate, including those with zero similarity.
pub fn vector_search(index: &VectorIndex, query: &EmbeddingVector, k: usize) -> Result<Vec<ScoredNode>, IndexError> {
    if query.dims() != index.dims {
        return Err(IndexError::DimensionMismatch { expected: index.dims, got: query.dims() });
    }
    let mut nodes: Vec<ScoredNode> = index
        .entries
        .iter()
        .map(|(id, v)| {
            let mut n = ScoredNode::new(file_id_of(id).to_string(), id.clone());
            n.vector_score = Some(cosine_similarity(query, v));
            n
        })
        .collect();
    sort_nodes(&mut nodes, |n| n.vector_score.unwrap_or(0.0));
    nodes.truncate(k);
    Ok(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> EmbeddingVector {
        EmbeddingVector(xs.to_vec())
    }

    fn toy() -> VectorIndex {
        let mut idx = VectorIndex::new(3);
        idx.insert("1#0", v(&[1.0, 0.0, 0.0])).unwrap();
        idx.insert("2#0", v(&[0.0, 1.0, 0.0])).unwrap();
        idx.insert("3#0", v(&[1.0, 1.0, 0.0])).unwrap();
        idx.insert("4#0", v(&[0.0, 0.0, 2.0])).unwrap();
        idx.insert("5#0", v(&[2.0, 2.0, 0.0])).unwrap();
        idx
    }

    #[test]
    fn self_similarity_first() {
        let hits = vector_search(&toy(), &v(&[0.0, 0.0, 2.0]), 1).unwrap();
        assert_eq!(hits[0].chunk_id, "4#0");
        assert!((hits[0].vector_score.unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn orthogonal_is_zero() {
        assert_eq!(cosine_similarity(&v(&[1.0, 0.0]), &v(&[0.0, 3.0])), 0.0);
    }

    #[test]
    fn toy_ranking_matches_exhaustive() {
        // query (1, 0.5, 0): 1#0 = 0.894, 3#0 = 5#0 = 0.9487, 2#0 = 0.447, 4#0 = 0
        let hits = vector_search(&toy(), &v(&[1.0, 0.5, 0.0]), 10).unwrap();
        let ids: Vec<&str> = hits.iter().map(|h| h.chunk_id.as_str()).collect();
        assert_eq!(ids, vec!["3#0", "5#0", "1#0", "2#0", "4#0"]);
    }

    #[test]
    fn dimension_mismatch() {
        assert_eq!(vector_search(&toy(), &v(&[1.0]), 1), Err(IndexError::DimensionMismatch { expected: 3, got: 1 }));
        assert!(toy().insert("9#0", v(&[1.0])).is_err());
        assert_eq!(toy().insert("9#0", v(&[f64::NAN, 0.0, 0.0])), Err(IndexError::NonFiniteEmbedding));
    }

    proptest! {
        #[test]
        fn flat_scan_equals_brute_force(
            vecs in prop::collection::vec(prop::collection::vec(-3i8..4, 4), 1..40),
            q in prop::collection::vec(-3i8..4, 4),
            k in 1usize..50,
        ) {
            let mut idx = VectorIndex::new(4);
            let mut all = vec![];
            for (i, raw) in vecs.iter().enumerate() {
                let e = EmbeddingVector(raw.iter().map(|&x| f64::from(x)).collect());
                let id = format!("{i:03}#0");
                idx.insert(id.clone(), e.clone()).unwrap();
                all.push((id, e));
            }
            let q = EmbeddingVector(q.iter().map(|&x| f64::from(x)).collect());
            // brute force: pairwise comparison counting rank positions
            let scores: Vec<(String, f64)> = all.iter().map(|(id, e)| (id.clone(), cosine_similarity(&q, e))).collect();
            let mut expected: Vec<String> = vec![];
            let mut remaining = scores.clone();
            while !remaining.is_empty() && expected.len() < k {
                let mut best = 0;
                for j in 1..remaining.len() {
                    let (ref bid, bs) = remaining[best];
                    let (ref jid, js) = remaining[j];
                    if js > bs || (js == bs && jid < bid) {
                        best = j;
                    }
                }
                expected.push(remaining.remove(best).0);
            }
            let got: Vec<String> = vector_search(&idx, &q, k).unwrap().into_iter().map(|n| n.chunk_id).collect();
            prop_assert_eq!(got, expected);
        }
    }
}
