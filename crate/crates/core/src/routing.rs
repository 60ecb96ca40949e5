//! Router query engine: pick the filetype engines a query is about, run the
//! hybrid retriever against each, and merge their node lists.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::FileType;
use crate::indexing::{tokenize, EmbeddingVector, TypedIndexSet};
use crate::providers::LlmProvider;
use crate::retrieval::{hybrid_retrieve_with_vector, sort_nodes, RetrievalError, RetrievalParams, ScoredNode};

pub const SELECTOR_ENGINES_HEADER: &str = "Available engines:";
pub const SELECTOR_QUERY_PREFIX: &str = "Query: ";

const ENGINE_DESCRIPTIONS: [(FileType, &str); 4] = [
    (FileType::Image, "photographs, pictures and other still images"),
    (FileType::Audio, "sound recordings, music and speech"),
    (FileType::Video, "video clips and footage"),
    (FileType::Document, "text documents and reports"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteMethod {
    LlmSelector,
    RuleFallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteDecision {
    pub engines: BTreeSet<FileType>,
    pub method: RouteMethod,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineResult {
    pub file_type: FileType,
    pub nodes: Vec<ScoredNode>,
    pub partial_answer: Option<String>,
    pub bm25_candidates: usize,
    pub vector_candidates: usize,
    /// The corpus has no files of this type.
    pub missing_index: bool,
}

pub fn render_selector_prompt(query_en: &str) -> String {
    let mut p = String::from(
        "You route archive search queries to specialised search engines.\n\
         Choose every engine whose file type the query asks for. If the query names no file type, choose all engines.\n",
    );
    p.push_str(SELECTOR_ENGINES_HEADER);
    p.push('\n');
    for (ft, desc) in ENGINE_DESCRIPTIONS {
        p.push_str(&format!("- {ft}: {desc}\n"));
    }
    p.push_str("Answer with a JSON array of engine names only, for example [\"image\", \"video\"].\n");
    p.push_str(SELECTOR_QUERY_PREFIX);
    p.push_str(query_en);
    p.push('\n');
    p
}

/// Read the selector reply: the first JSON array of engine names in it.
/// Anything else, including an empty array or an unknown name, is rejected.
pub fn parse_selector_reply(reply: &str) -> Option<BTreeSet<FileType>> {
    let start = reply.find('[')?;
    let end = reply[start..].find(']')? + start;
    let names: Vec<String> = serde_json::from_str(&reply[start..=end]).ok()?;
    let mut engines = BTreeSet::new();
    for n in names {
        engines.insert(n.trim().to_lowercase().parse::<FileType>().ok()?);
    }
    (!engines.is_empty()).then_some(engines)
}

const KEYWORDS: [(FileType, &[&str]); 4] = [
    (FileType::Image, &["image", "photo", "picture", "photograph"]),
    (FileType::Audio, &["audio", "sound", "recording"]),
    (FileType::Video, &["video", "clip", "footage"]),
    (FileType::Document, &["document", "text", "report"]),
];

/// Keyword scan over the query terms (singular or plural); all four engines
/// when nothing matches.
pub fn rule_route(query_en: &str) -> BTreeSet<FileType> {
    let terms = tokenize(query_en);
    let mentioned = |kw: &str| terms.iter().any(|t| t == kw || t.strip_suffix('s') == Some(kw));
    let found: BTreeSet<FileType> =
        KEYWORDS.iter().filter(|(_, kws)| kws.iter().any(|k| mentioned(k))).map(|(ft, _)| *ft).collect();
    if found.is_empty() {
        FileType::ALL.into_iter().collect()
    } else {
        found
    }
}

pub fn classify_query(query_en: &str, llm: &dyn LlmProvider) -> RouteDecision {
    let why = match llm.complete(&render_selector_prompt(query_en)) {
        Ok(reply) => match parse_selector_reply(&reply) {
            Some(engines) => {
                return RouteDecision {
                    engines,
                    method: RouteMethod::LlmSelector,
                    rationale: format!("selector replied {}", reply.trim()),
                }
            }
            None => format!("unparseable selector reply {:?}", reply.trim()),
        },
        Err(e) => format!("selector failed: {e}"),
    };
    let engines = rule_route(query_en);
    let rationale = format!("{why}; keyword rules chose {}", join_types(&engines));
    RouteDecision { engines, method: RouteMethod::RuleFallback, rationale }
}

fn join_types(types: &BTreeSet<FileType>) -> String {
    types.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(",")
}

/// Run the hybrid retriever against each selected engine, in fixed engine
/// order. An engine without an index yields an empty, flagged result.
pub fn route_and_query(
    query_en: &str,
    query_vec: &EmbeddingVector,
    decision: &RouteDecision,
    indices: &TypedIndexSet,
    params: &RetrievalParams,
) -> Result<Vec<EngineResult>, RetrievalError> {
    let mut out = Vec::with_capacity(decision.engines.len());
    for &ft in &decision.engines {
        let result = match indices.get(ft) {
            Some(pair) => {
                let b = hybrid_retrieve_with_vector(query_en, query_vec, pair, params)?;
                EngineResult {
                    file_type: ft,
                    nodes: b.nodes,
                    partial_answer: None,
                    bm25_candidates: b.bm25_count,
                    vector_candidates: b.vector_count,
                    missing_index: false,
                }
            }
            None => EngineResult {
                file_type: ft,
                nodes: Vec::new(),
                partial_answer: Some(format!("no {ft} index")),
                bm25_candidates: 0,
                vector_candidates: 0,
                missing_index: true,
            },
        };
        out.push(result);
    }
    Ok(out)
}

/// The simple summarizer: concatenate, re-sort by hybrid score (ties by
/// chunk id) and keep `final_k`.
pub fn summarize_results(results: &[EngineResult], final_k: usize) -> Vec<ScoredNode> {
    let mut nodes: Vec<ScoredNode> = results.iter().flat_map(|r| r.nodes.iter().cloned()).collect();
    sort_nodes(&mut nodes, |n| n.hybrid_score.unwrap_or(0.0));
    nodes.truncate(final_k);
    nodes
}
