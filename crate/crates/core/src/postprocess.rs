//! Post-processors run between retrieval and synthesis: a reranker that
//! rescores and cuts the node list, and a long-context reorder that moves
//! the strongest nodes to the edges of the prompt.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::providers::RerankProvider;
use crate::retrieval::{sort_nodes, ScoredNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PostProcessConfig {
    pub rerank_enabled: bool,
    pub rerank_top_n: usize,
    pub reorder_enabled: bool,
}

impl Default for PostProcessConfig {
    fn default() -> Self {
        PostProcessConfig { rerank_enabled: true, rerank_top_n: 5, reorder_enabled: true }
    }
}

impl PostProcessConfig {
    pub fn validate(&self) -> Result<(), &'static str> {
        if self.rerank_top_n == 0 {
            return Err("rerank_top_n must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RerankOutcome {
    pub nodes: Vec<ScoredNode>,
    pub degraded: bool,
}

/// Score every node against the query (`texts[i]` is the chunk text of
/// `nodes[i]`), sort by rerank score and keep `top_n`. A failing provider,
/// or one returning the wrong number of scores, leaves the list untouched.
pub fn rerank(
    query_en: &str,
    nodes: Vec<ScoredNode>,
    texts: &[&str],
    reranker: &dyn RerankProvider,
    top_n: usize,
) -> RerankOutcome {
    if nodes.is_empty() {
        return RerankOutcome { nodes, degraded: false };
    }
    let scores = match reranker.rerank_scores(query_en, texts) {
        Ok(s) if s.len() == nodes.len() && s.iter().all(|x| x.is_finite()) => s,
        _ => return RerankOutcome { nodes, degraded: true },
    };
    let mut nodes: Vec<ScoredNode> = nodes
        .into_iter()
        .zip(scores)
        .map(|(mut n, s)| {
            n.rerank_score = Some(s);
            n
        })
        .collect();
    sort_nodes(&mut nodes, |n| n.rerank_score.unwrap_or(0.0));
    nodes.truncate(top_n);
    RerankOutcome { nodes, degraded: false }
}

/// Relevance-sorted input r1..rn becomes r1, r3, r5, ..., r4, r2: odd ranks
/// fill from the front, even ranks from the back.
pub fn long_context_reorder<T>(nodes: Vec<T>) -> Vec<T> {
    let mut front = Vec::with_capacity(nodes.len());
    let mut back = Vec::new();
    for (i, n) in nodes.into_iter().enumerate() {
        if i % 2 == 0 {
            front.push(n);
        } else {
            back.push(n);
        }
    }
    front.extend(back.into_iter().rev());
    front
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::mock::{FailingProvider, MockReranker};
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;

    fn node(id: &str) -> ScoredNode {
        ScoredNode::new(id.to_string(), alloc::format!("{id}#0"))
    }

    #[test]
    fn reorder_traces() {
        assert_eq!(long_context_reorder(vec![1]), vec![1]);
        assert_eq!(long_context_reorder(vec![1, 2]), vec![1, 2]);
        assert_eq!(long_context_reorder(vec![1, 2, 3, 4, 5]), vec![1, 3, 5, 4, 2]);
        assert_eq!(long_context_reorder(vec![1, 2, 3, 4]), vec![1, 3, 4, 2]);
        assert!(long_context_reorder(Vec::<u8>::new()).is_empty());
    }

    #[test]
    fn overlap_rerank() {
        let nodes = vec![node("2"), node("1")];
        let out =
            rerank("wildlife photo", nodes, &["annual budget report", "wildlife photo of lions"], &MockReranker, 5);
        assert!(!out.degraded);
        assert_eq!(out.nodes[0].file_id, "1");
        assert_eq!(out.nodes[0].rerank_score, Some(1.0));
        assert_eq!(out.nodes[1].rerank_score, Some(0.0));
    }

    #[test]
    fn top_n_and_failure() {
        let nodes = vec![node("1"), node("2"), node("3")];
        let texts = ["a", "b c", "c"];
        let out = rerank("c", nodes.clone(), &texts, &MockReranker, 1);
        assert_eq!(out.nodes.len(), 1);
        assert_eq!(out.nodes[0].file_id, "2");
        let out = rerank("c", nodes.clone(), &texts, &FailingProvider::default(), 1);
        assert_eq!((out.nodes, out.degraded), (nodes, true));
    }

    proptest! {
        #[test]
        fn reorder_is_a_permutation_with_top_two_at_the_edges(n in 0usize..60) {
            let input: Vec<usize> = (0..n).collect();
            let out = long_context_reorder(input.clone());
            let mut sorted = out.clone();
            sorted.sort();
            prop_assert_eq!(&sorted, &input);
            if n >= 2 {
                prop_assert_eq!(out[0], 0);
                prop_assert_eq!(out[n - 1], 1);
            }
        }
    }
}
