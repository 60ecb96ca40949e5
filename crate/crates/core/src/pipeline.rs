//! The end-to-end query pipeline:
//! translate → route → retrieve → postprocess → synthesize → backtranslate.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CorpusStore, FileType};
use crate::indexing::TypedIndexSet;
use crate::language::{detect_language, from_english, to_english, LanguageTag};
use crate::postprocess::{long_context_reorder, rerank, PostProcessConfig};
use crate::providers::mock::{MockDetector, MockEmbedder, MockLlm, MockReranker, MockTranslator};
use crate::providers::{
    DetectionProvider, EmbeddingProvider, LlmProvider, MockBehavior, RerankProvider, TranslationProvider,
};
use crate::retrieval::{embed_query, hybrid_retrieve_with_vector, RetrievalError, RetrievalParams, ScoredNode};
use crate::routing::{classify_query, route_and_query, summarize_results, RouteDecision, RouteMethod};
use crate::synthesis::{synthesize, Degradation, PromptChunk, SynthesisPrompt, SynthesizedResponse};

/// Components removed from the pipeline; `true` means removed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ablation {
    pub translator: bool,
    pub router: bool,
    pub postprocessors: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub retrieval: RetrievalParams,
    pub postprocess: PostProcessConfig,
    pub ablation: Ablation,
    pub prompt: SynthesisPrompt,
}

/// Per-request overrides of the configured parameters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct QueryOverrides {
    pub alpha: Option<f64>,
    pub k: Option<usize>,
    pub branch_k: Option<usize>,
    pub ablation: Option<Ablation>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error("invalid post-processing configuration: {0}")]
    PostProcess(&'static str),
}

/// Source of monotonic milliseconds for stage timings.
pub trait Clock: Send + Sync {
    fn now_ms(&self) -> f64;
}

/// A clock that never advances; every timing reads 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct FrozenClock;

impl Clock for FrozenClock {
    fn now_ms(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Translate,
    Route,
    Retrieve,
    Postprocess,
    Synthesize,
    Backtranslate,
}

impl Stage {
    pub const ALL: [Stage; 6] =
        [Stage::Translate, Stage::Route, Stage::Retrieve, Stage::Postprocess, Stage::Synthesize, Stage::Backtranslate];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Translate => "translate",
            Stage::Route => "route",
            Stage::Retrieve => "retrieve",
            Stage::Postprocess => "postprocess",
            Stage::Synthesize => "synthesize",
            Stage::Backtranslate => "backtranslate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub skipped: bool,
    pub ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineTrace {
    pub file_type: FileType,
    pub bm25_candidates: usize,
    pub vector_candidates: usize,
    pub nodes: usize,
    pub missing_index: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryTrace {
    pub stages: Vec<StageRecord>,
    pub language: LanguageTag,
    pub translation_degraded: bool,
    pub query_en: String,
    /// Absent when the router is removed and the merged index is queried.
    pub route: Option<RouteDecision>,
    pub merged_index: bool,
    pub engines: Vec<EngineTrace>,
    pub params: RetrievalParams,
    pub ablation: Ablation,
    pub retrieved: Vec<ScoredNode>,
    pub postprocessed: Vec<ScoredNode>,
    pub notes: Vec<String>,
    pub total_ms: f64,
}

impl QueryTrace {
    pub fn stage_ms(&self, stage: Stage) -> f64 {
        self.stages.iter().find(|s| s.stage == stage).map_or(0.0, |s| s.ms)
    }
}

/// Every external intelligence the pipeline calls.
#[derive(Clone)]
pub struct ProviderSet {
    pub llm: Arc<dyn LlmProvider>,
    pub embedder: Arc<dyn EmbeddingProvider>,
    pub detector: Arc<dyn DetectionProvider>,
    pub translator: Arc<dyn TranslationProvider>,
    pub reranker: Arc<dyn RerankProvider>,
}

impl ProviderSet {
    pub fn mock(behavior: &MockBehavior) -> Self {
        ProviderSet {
            llm: Arc::new(MockLlm::new(behavior.llm_mode)),
            embedder: Arc::new(MockEmbedder::from_behavior(behavior)),
            detector: Arc::new(MockDetector),
            translator: Arc::new(MockTranslator),
            reranker: Arc::new(MockReranker),
        }
    }
}

impl core::fmt::Debug for ProviderSet {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ProviderSet").finish_non_exhaustive()
    }
}

#[derive(Clone)]
pub struct Pipeline {
    corpus: Arc<CorpusStore>,
    indices: Arc<TypedIndexSet>,
    providers: ProviderSet,
    config: PipelineConfig,
    clock: Arc<dyn Clock>,
}

struct Timer<'a> {
    clock: &'a dyn Clock,
    started: f64,
    last: f64,
    stages: Vec<StageRecord>,
}

impl<'a> Timer<'a> {
    fn new(clock: &'a dyn Clock) -> Self {
        let now = clock.now_ms();
        Timer { clock, started: now, last: now, stages: Vec::new() }
    }

    fn record(&mut self, stage: Stage, skipped: bool) {
        let now = self.clock.now_ms();
        self.stages.push(StageRecord { stage, skipped, ms: now - self.last });
        self.last = now;
    }
}

impl Pipeline {
    pub fn new(
        corpus: Arc<CorpusStore>,
        indices: Arc<TypedIndexSet>,
        providers: ProviderSet,
        config: PipelineConfig,
    ) -> Self {
        Pipeline { corpus, indices, providers, config, clock: Arc::new(FrozenClock) }
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn corpus(&self) -> &CorpusStore {
        &self.corpus
    }

    pub fn indices(&self) -> &TypedIndexSet {
        &self.indices
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn providers(&self) -> &ProviderSet {
        &self.providers
    }

    /// The same pipeline with a different configuration, sharing corpus,
    /// indices and providers.
    pub fn reconfigured(&self, config: PipelineConfig) -> Self {
        Pipeline { config, ..self.clone() }
    }

    pub fn effective_config(&self, overrides: &QueryOverrides) -> PipelineConfig {
        let mut c = self.config.clone();
        if let Some(a) = overrides.alpha {
            c.retrieval.alpha = a;
        }
        if let Some(k) = overrides.k {
            c.retrieval.final_k = k;
        }
        if let Some(k) = overrides.branch_k {
            c.retrieval.top_k_per_branch = k;
        }
        if let Some(ab) = overrides.ablation {
            c.ablation = ab;
        }
        c
    }

    pub fn query(
        &self,
        raw_query: &str,
        overrides: &QueryOverrides,
    ) -> Result<(SynthesizedResponse, QueryTrace), PipelineError> {
        let cfg = self.effective_config(overrides);
        cfg.retrieval.validate()?;
        cfg.postprocess.validate().map_err(PipelineError::PostProcess)?;
        let p = &self.providers;
        let mut timer = Timer::new(self.clock.as_ref());
        let mut flags = BTreeSet::new();
        let mut notes = Vec::new();

        // translate
        let (language, query_en, translation_degraded) = if cfg.ablation.translator {
            notes.push("translator removed: query used as given".to_string());
            (LanguageTag::english(0.0), raw_query.to_string(), false)
        } else {
            let det = detect_language(raw_query, p.detector.as_ref());
            if let Some(n) = det.note {
                flags.insert(Degradation::DetectionFallback);
                notes.push(n);
            }
            let tq = to_english(raw_query, &det.tag, p.translator.as_ref());
            if tq.degraded {
                flags.insert(Degradation::TranslationFailed);
                notes.push("query translation failed: original text used".to_string());
            }
            (det.tag, tq.english, tq.degraded)
        };
        timer.record(Stage::Translate, cfg.ablation.translator);

        // route
        let route = if cfg.ablation.router {
            None
        } else {
            let d = classify_query(&query_en, p.llm.as_ref());
            if d.method == RouteMethod::RuleFallback {
                flags.insert(Degradation::SelectorFallback);
            }
            Some(d)
        };
        timer.record(Stage::Route, cfg.ablation.router);

        // retrieve
        let qv = embed_query(&query_en, p.embedder.as_ref())?;
        let mut engines = Vec::new();
        let retrieved = match &route {
            Some(decision) => {
                let results = route_and_query(&query_en, &qv, decision, &self.indices, &cfg.retrieval)?;
                for r in &results {
                    if r.missing_index {
                        flags.insert(Degradation::MissingIndex);
                        notes.push(format!("no {} index: engine skipped", r.file_type));
                    }
                    engines.push(EngineTrace {
                        file_type: r.file_type,
                        bm25_candidates: r.bm25_candidates,
                        vector_candidates: r.vector_candidates,
                        nodes: r.nodes.len(),
                        missing_index: r.missing_index,
                    });
                }
                summarize_results(&results, cfg.retrieval.final_k)
            }
            None => {
                let b = hybrid_retrieve_with_vector(&query_en, &qv, self.indices.merged(), &cfg.retrieval)?;
                notes.push(format!(
                    "router removed: merged index gave {} bm25 and {} vector candidates",
                    b.bm25_count, b.vector_count
                ));
                b.nodes
            }
        };
        timer.record(Stage::Retrieve, false);

        // postprocess
        let mut nodes = retrieved.clone();
        if !cfg.ablation.postprocessors {
            if cfg.postprocess.rerank_enabled {
                let texts: Vec<&str> = nodes.iter().map(|n| self.chunk_text(&n.chunk_id)).collect();
                let out = rerank(&query_en, nodes, &texts, p.reranker.as_ref(), cfg.postprocess.rerank_top_n);
                if out.degraded {
                    flags.insert(Degradation::RerankFailed);
                    notes.push("rerank failed: retrieval order kept".to_string());
                }
                nodes = out.nodes;
            }
            if cfg.postprocess.reorder_enabled {
                nodes = long_context_reorder(nodes);
            }
        }
        timer.record(Stage::Postprocess, cfg.ablation.postprocessors);

        // synthesize
        let chunks: Vec<PromptChunk<'_>> = nodes.iter().filter_map(|n| self.prompt_chunk(n)).collect();
        let mut response = synthesize(&query_en, &chunks, p.llm.as_ref(), &cfg.prompt, &self.corpus);
        timer.record(Stage::Synthesize, false);

        // backtranslate
        let skip_back = cfg.ablation.translator || language.is_english();
        if !skip_back && !response.degradation_flags.contains(&Degradation::SynthesisFailed) {
            let back = from_english(&response.text, &language, p.translator.as_ref());
            if back.degraded {
                flags.insert(Degradation::BacktranslationFailed);
                notes.push("response translation failed: English text returned".to_string());
            }
            response.set_text(back.text, &self.corpus);
        }
        timer.record(Stage::Backtranslate, cfg.ablation.translator);

        response.degradation_flags.extend(flags);
        for s in &timer.stages {
            response.timings.insert(s.stage.as_str().to_string(), s.ms);
        }
        let total_ms = timer.last - timer.started;
        let trace = QueryTrace {
            stages: timer.stages,
            language,
            translation_degraded,
            query_en,
            merged_index: route.is_none(),
            route,
            engines,
            params: cfg.retrieval,
            ablation: cfg.ablation,
            retrieved,
            postprocessed: nodes,
            notes,
            total_ms,
        };
        Ok((response, trace))
    }

    fn chunk_text(&self, chunk_id: &str) -> &str {
        self.indices.chunk(chunk_id).map_or("", |c| c.text.as_str())
    }

    fn prompt_chunk<'a>(&'a self, n: &ScoredNode) -> Option<PromptChunk<'a>> {
        let chunk = self.indices.chunk(&n.chunk_id)?;
        let file = self.corpus.get(&chunk.file_id)?;
        Some(PromptChunk { file_id: &file.file_id, file_type: file.file_type, title: &file.title, text: &chunk.text })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{generate_corpus, DEFAULT_TOPICS};
    use crate::indexing::{build_typed_indices, Bm25Params, ChunkParams};
    use crate::providers::mock::FailingProvider;
    use crate::providers::LlmMode;
    use core::sync::atomic::{AtomicU64, Ordering};

    fn pipeline(mode: LlmMode) -> Pipeline {
        let topics: Vec<String> = DEFAULT_TOPICS.iter().map(|t| t.to_string()).collect();
        let corpus = generate_corpus(&topics, 3, 7);
        let behavior = MockBehavior { llm_mode: mode, ..Default::default() };
        let providers = ProviderSet::mock(&behavior);
        let indices =
            build_typed_indices(&corpus, ChunkParams::default(), Bm25Params::default(), providers.embedder.as_ref())
                .unwrap();
        Pipeline::new(Arc::new(corpus), Arc::new(indices), providers, PipelineConfig::default())
    }

    struct Ticking(AtomicU64);
    impl Clock for Ticking {
        fn now_ms(&self) -> f64 {
            self.0.fetch_add(1, Ordering::SeqCst) as f64
        }
    }

    #[test]
    fn type_one_query_cites_matching_files() {
        let p = pipeline(LlmMode::CitingOracle);
        let (resp, trace) = p.query("Recommend some image files about wildlife", &QueryOverrides::default()).unwrap();
        assert!(!resp.cited_file_ids.is_empty());
        let files: Vec<_> = resp.cited_file_ids.iter().map(|id| p.corpus().get(id).unwrap()).collect();
        assert!(files.iter().all(|f| f.file_type == FileType::Image));
        assert!(files.iter().filter(|f| f.topic == "wildlife").count() >= 2, "{files:?}");
        assert_eq!(trace.stages.iter().map(|s| s.stage).collect::<Vec<_>>(), Stage::ALL.to_vec());
        assert_eq!(trace.language.code, "en");
        assert!(resp.degradation_flags.is_empty());
    }

    #[test]
    fn korean_query_round_trips() {
        let p = pipeline(LlmMode::CitingOracle);
        let (en, _) = p.query("Recommend some image files about wildlife", &QueryOverrides::default()).unwrap();
        let (ko, trace) = p.query("추천해 몇몇 이미지 파일들 관련 야생동물", &QueryOverrides::default()).unwrap();
        assert_eq!(trace.language.code, "ko");
        assert_eq!(trace.query_en, "Recommend some image files about wildlife");
        assert_eq!(ko.cited_file_ids, en.cited_file_ids);
        assert!(ko.text.starts_with("추천됨"));
    }

    #[test]
    fn ablations_skip_stages() {
        let p = pipeline(LlmMode::CitingOracle);
        let o = QueryOverrides {
            ablation: Some(Ablation { translator: true, router: true, postprocessors: true }),
            ..Default::default()
        };
        let (_, trace) = p.query("Recommend some image files about wildlife", &o).unwrap();
        let skipped: Vec<bool> = trace.stages.iter().map(|s| s.skipped).collect();
        assert_eq!(skipped, [true, true, false, true, false, true]);
        assert!(trace.merged_index && trace.route.is_none());
        assert_eq!(trace.postprocessed, trace.retrieved);
        assert_eq!(trace.retrieved.len(), 10);
    }

    #[test]
    fn failures_degrade() {
        let mut p = pipeline(LlmMode::Fail);
        p.providers.detector = Arc::new(FailingProvider::default());
        p.providers.reranker = Arc::new(FailingProvider::default());
        let (resp, trace) = p.query("Recommend some image files about wildlife", &QueryOverrides::default()).unwrap();
        assert!(resp.cited_file_ids.is_empty());
        for f in [
            Degradation::DetectionFallback,
            Degradation::SelectorFallback,
            Degradation::RerankFailed,
            Degradation::SynthesisFailed,
        ] {
            assert!(resp.degradation_flags.contains(&f), "{f:?}");
        }
        assert_eq!(trace.route.unwrap().engines.into_iter().collect::<Vec<_>>(), [FileType::Image]);
    }

    #[test]
    fn invalid_override_rejected() {
        let p = pipeline(LlmMode::CitingOracle);
        let o = QueryOverrides { alpha: Some(2.0), ..Default::default() };
        assert!(p.query("x", &o).is_err());
    }

    #[test]
    fn timings_come_from_the_clock() {
        let p = pipeline(LlmMode::CitingOracle).with_clock(Arc::new(Ticking(AtomicU64::new(0))));
        let (resp, trace) = p.query("Give me some files about oceans", &QueryOverrides::default()).unwrap();
        assert!(trace.stages.iter().all(|s| s.ms == 1.0));
        assert_eq!(trace.total_ms, 6.0);
        assert_eq!(resp.timings.len(), 6);
    }
}
