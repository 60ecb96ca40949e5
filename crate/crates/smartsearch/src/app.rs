//! Wiring: providers from config, index lifecycle, and parallel evaluation.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context};
use rayon::prelude::*;
use smartsearch_core::corpus::CorpusStore;
use smartsearch_core::eval::{
    cases, evaluate_query, fingerprint, generate_corpus, generate_queries, AblationTable, EvalQuery, MetricsReport,
    QuerySet, Variant, DEFAULT_TOPICS,
};
use smartsearch_core::indexing::{build_typed_indices, TypedIndexSet};
use smartsearch_core::pipeline::{Clock, Pipeline, ProviderSet, QueryOverrides};
use smartsearch_core::providers::{Backend, ProviderKind};
use tracing::info;

use crate::config::AppConfig;
use crate::corpus_io::{load_corpus, write_corpus, Strictness};
use crate::http::{HttpClient, HttpDetector, HttpEmbedder, HttpLlm, HttpReranker, HttpTranslator};
use crate::persistence::{load_index, save_index, Manifest};

/// Files per (filetype, topic) cell of the synthetic corpus.
pub const SYNTHETIC_PER_CELL: usize = 3;
/// Name of the corpus copy stored next to a persisted index.
pub const INDEX_CORPUS_FILE: &str = "corpus.jsonl";

/// Wall-clock stage timing.
#[derive(Debug)]
pub struct StdClock(Instant);

impl Default for StdClock {
    fn default() -> Self {
        StdClock(Instant::now())
    }
}

impl Clock for StdClock {
    fn now_ms(&self) -> f64 {
        self.0.elapsed().as_secs_f64() * 1000.0
    }
}

pub fn build_providers(cfg: &AppConfig) -> anyhow::Result<ProviderSet> {
    let mut set = ProviderSet::mock(&cfg.mock);
    for kind in ProviderKind::ALL {
        let section = cfg.providers.get(kind);
        if section.backend != Backend::Http {
            continue;
        }
        let client = HttpClient::new(&section.to_provider_config(kind))?;
        match kind {
            ProviderKind::Llm => set.llm = Arc::new(HttpLlm(client)),
            ProviderKind::Embedding => set.embedder = Arc::new(HttpEmbedder::new(client, section.dims)),
            ProviderKind::Translation => set.translator = Arc::new(HttpTranslator(client)),
            ProviderKind::Detection => set.detector = Arc::new(HttpDetector(client)),
            ProviderKind::Rerank => set.reranker = Arc::new(HttpReranker(client)),
        }
    }
    Ok(set)
}

/// Identifies the embedding space an index was built in; a persisted index
/// is only usable with the same embedder.
pub fn embedder_id(cfg: &AppConfig) -> String {
    let e = &cfg.providers.embedding;
    match e.backend {
        Backend::Mock => {
            format!("mock:dims={},seed={},cross_lingual={}", cfg.mock.embed_dims, cfg.mock.seed, cfg.mock.cross_lingual)
        }
        Backend::Http => format!("http:{}", e.model_id.as_deref().unwrap_or("default")),
    }
}

pub fn strictness(cfg: &AppConfig) -> Strictness {
    if cfg.lax {
        Strictness::Lax
    } else {
        Strictness::Strict
    }
}

pub fn load_configured_corpus(cfg: &AppConfig, path: &Path) -> anyhow::Result<CorpusStore> {
    let corpus = load_corpus(path, strictness(cfg), cfg.topics.clone())?;
    info!(path = %path.display(), files = corpus.len(), "corpus loaded");
    Ok(corpus)
}

pub fn synthetic_corpus(cfg: &AppConfig, seed: u64) -> CorpusStore {
    generate_corpus(&benchmark_topics(cfg), SYNTHETIC_PER_CELL, seed)
}

pub fn benchmark_topics(cfg: &AppConfig) -> Vec<String> {
    cfg.topics.clone().unwrap_or_else(|| DEFAULT_TOPICS.iter().map(|t| t.to_string()).collect())
}

pub fn build_indices(cfg: &AppConfig, corpus: &CorpusStore, providers: &ProviderSet) -> anyhow::Result<TypedIndexSet> {
    let started = Instant::now();
    let set = build_typed_indices(corpus, cfg.chunk, cfg.bm25, providers.embedder.as_ref())?;
    info!(chunks = set.chunks().count(), ms = started.elapsed().as_millis() as u64, "indices built");
    Ok(set)
}

/// Load, optionally enrich, index and persist a corpus. The corpus itself
/// is stored alongside the index so `serve` needs only the index directory.
pub fn ingest(cfg: &AppConfig, corpus_path: &Path, enrich: bool) -> anyhow::Result<Manifest> {
    let providers = build_providers(cfg)?;
    let mut corpus = load_configured_corpus(cfg, corpus_path)?;
    if enrich {
        let n = corpus.enrich_missing(providers.llm.as_ref())?;
        info!(files = n, "text representations generated");
    }
    let set = build_indices(cfg, &corpus, &providers)?;
    let dir = &cfg.index_dir;
    let manifest = save_index(dir, &set, &embedder_id(cfg), corpus.len())?;
    write_corpus(&dir.join(INDEX_CORPUS_FILE), &corpus)?;
    info!(dir = %dir.display(), "index written");
    Ok(manifest)
}

/// Open the persisted index of `cfg.index_dir` as a query pipeline.
pub fn open_pipeline(cfg: &AppConfig) -> anyhow::Result<Pipeline> {
    let dir = &cfg.index_dir;
    let (set, manifest) = load_index(dir).with_context(|| format!("cannot open index at {}", dir.display()))?;
    let expected = embedder_id(cfg);
    if manifest.embedder != expected {
        bail!(
            "index at {} was built with embedder {:?} but the configuration uses {:?}; re-run ingest",
            dir.display(),
            manifest.embedder,
            expected
        );
    }
    let corpus = load_corpus(&dir.join(INDEX_CORPUS_FILE), Strictness::Lax, None)?;
    let providers = build_providers(cfg)?;
    Ok(Pipeline::new(Arc::new(corpus), Arc::new(set), providers, cfg.pipeline_config()?)
        .with_clock(Arc::new(StdClock::default())))
}

/// In-memory pipeline over a corpus, for evaluation runs.
pub fn pipeline_for(cfg: &AppConfig, corpus: CorpusStore) -> anyhow::Result<Pipeline> {
    let providers = build_providers(cfg)?;
    let set = build_indices(cfg, &corpus, &providers)?;
    Ok(Pipeline::new(Arc::new(corpus), Arc::new(set), providers, cfg.pipeline_config()?)
        .with_clock(Arc::new(StdClock::default())))
}

/// Where an evaluation corpus comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusSource {
    File(PathBuf),
    Synthetic { seed: u64 },
}

impl CorpusSource {
    pub fn resolve(cfg: &AppConfig, explicit: Option<PathBuf>, seed: u64) -> Self {
        match explicit.or_else(|| cfg.corpus_path.clone()) {
            Some(p) => CorpusSource::File(p),
            None => CorpusSource::Synthetic { seed },
        }
    }

    pub fn load(&self, cfg: &AppConfig) -> anyhow::Result<CorpusStore> {
        match self {
            CorpusSource::File(p) => load_configured_corpus(cfg, p),
            CorpusSource::Synthetic { seed } => Ok(synthetic_corpus(cfg, *seed)),
        }
    }

    pub fn label(&self) -> String {
        match self {
            CorpusSource::File(p) => format!("corpus={}", p.display()),
            CorpusSource::Synthetic { seed } => format!("synthetic seed={seed}"),
        }
    }
}

/// What a run's fingerprint covers besides the pipeline configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunLabel {
    /// `mock`, `http` or `mixed`.
    pub backend: String,
    /// Corpus origin, e.g. `synthetic seed=7`.
    pub source: String,
}

impl std::fmt::Display for RunLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}", self.backend, self.source)
    }
}

/// Topics the benchmark queries range over: the configured set, else the
/// corpus topics in order of first appearance.
pub fn query_topics(cfg: &AppConfig, corpus: &CorpusStore) -> Vec<String> {
    if let Some(t) = &cfg.topics {
        return t.clone();
    }
    let mut seen = Vec::new();
    for f in corpus.files() {
        if !seen.contains(&f.topic) {
            seen.push(f.topic.clone());
        }
    }
    seen
}

/// Corpus, pipeline and benchmark queries for an evaluation run, as the
/// `eval`, `sweep-alpha` and `ablate` commands set them up.
pub fn prepare_bench(
    cfg: &AppConfig,
    corpus: Option<PathBuf>,
    free_size: bool,
    seed: u64,
) -> anyhow::Result<(Pipeline, Vec<EvalQuery>, RunLabel)> {
    let source = CorpusSource::resolve(cfg, corpus, seed);
    let corpus = source.load(cfg)?;
    let topics = query_topics(cfg, &corpus);
    let queries = generate_queries(&topics, !free_size)?;
    let run = RunLabel { backend: cfg.backend_label().to_string(), source: source.label() };
    Ok((pipeline_for(cfg, corpus)?, queries, run))
}

/// Every case of the query set on the rayon pool. Rows are keyed and sorted
/// by query id, so the report does not depend on completion order.
pub fn run_eval(
    pipeline: &Pipeline,
    queries: &[EvalQuery],
    set: QuerySet,
    overrides: &QueryOverrides,
    run: &RunLabel,
) -> MetricsReport {
    let outcomes =
        cases(queries, set).into_par_iter().map(|(q, lang)| evaluate_query(pipeline, q, lang, overrides)).collect();
    let fp = fingerprint(&pipeline.effective_config(overrides), &run.to_string());
    MetricsReport::from_outcomes(outcomes, fp, run.backend.clone())
}

pub fn run_sweep(
    pipeline: &Pipeline,
    queries: &[EvalQuery],
    set: QuerySet,
    alphas: &[f64],
    run: &RunLabel,
) -> Vec<(f64, MetricsReport)> {
    alphas
        .iter()
        .map(|&alpha| {
            let o = QueryOverrides { alpha: Some(alpha), ..Default::default() };
            (alpha, run_eval(pipeline, queries, set, &o, run))
        })
        .collect()
}

pub fn run_ablation_parallel(
    pipeline: &Pipeline,
    queries: &[EvalQuery],
    set: QuerySet,
    variants: &[Variant],
    run: &RunLabel,
) -> AblationTable {
    let mut order = vec![Variant::Baseline];
    order.extend(variants.iter().copied().filter(|v| *v != Variant::Baseline));
    order.dedup();
    let reports = order
        .into_iter()
        .map(|v| {
            let o = QueryOverrides { ablation: Some(v.ablation()), ..Default::default() };
            (v, run_eval(pipeline, queries, set, &o, run))
        })
        .collect();
    AblationTable::from_reports(reports)
}
