use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::hash::Hasher;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};

use super::generate::{relevant_ids, EvalQuery};
use super::metrics::{compute_metrics, GroupSummary, MetricsReport, QueryOutcome};
use crate::pipeline::{Ablation, Pipeline, PipelineConfig, QueryOverrides};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryLanguage {
    En,
    Ko,
}

impl QueryLanguage {
    pub fn as_str(self) -> &'static str {
        match self {
            QueryLanguage::En => "en",
            QueryLanguage::Ko => "ko",
        }
    }
}

/// Which renderings of the benchmark queries to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuerySet {
    English,
    Korean,
    /// Every query in English and again in Korean.
    Bilingual,
}

/// The (query, language) pairs a query set expands to. Queries without a
/// Korean rendering are left out of the Korean side.
pub fn cases(queries: &[EvalQuery], set: QuerySet) -> Vec<(&EvalQuery, QueryLanguage)> {
    let en = queries.iter().map(|q| (q, QueryLanguage::En));
    let ko = queries.iter().filter(|q| q.text_ko.is_some()).map(|q| (q, QueryLanguage::Ko));
    match set {
        QuerySet::English => en.collect(),
        QuerySet::Korean => ko.collect(),
        QuerySet::Bilingual => en.chain(ko).collect(),
    }
}

/// Run one query through the pipeline and score the IDs its answer cites.
/// A pipeline error is recorded on the row and scores as a miss.
pub fn evaluate_query(
    pipeline: &Pipeline,
    q: &EvalQuery,
    lang: QueryLanguage,
    overrides: &QueryOverrides,
) -> QueryOutcome {
    let text = match lang {
        QueryLanguage::En => q.text_en.as_str(),
        QueryLanguage::Ko => q.text_ko.as_deref().unwrap_or(&q.text_en),
    };
    let relevant = relevant_ids(pipeline.corpus(), q);
    let mut outcome = QueryOutcome {
        query_id: q.query_id.clone(),
        query_type: q.query_type,
        language: lang,
        topic: q.topic.clone(),
        target_types: q.target_types.clone(),
        query_text: text.to_string(),
        retrieved_ids: Vec::new(),
        relevant_count: relevant.len(),
        metrics: compute_metrics(&[], &relevant),
        degradations: Default::default(),
        error: None,
        stage_ms: BTreeMap::new(),
        total_ms: 0.0,
    };
    match pipeline.query(text, overrides) {
        Ok((response, trace)) => {
            outcome.metrics = compute_metrics(&response.cited_file_ids, &relevant);
            outcome.retrieved_ids = response.cited_file_ids;
            outcome.degradations = response.degradation_flags;
            outcome.stage_ms = trace.stages.iter().map(|s| (s.stage, s.ms)).collect();
            outcome.total_ms = trace.total_ms;
        }
        Err(e) => outcome.error = Some(e.to_string()),
    }
    outcome
}

/// Stable hash of the effective configuration plus a free-form label
/// (backend, seed, ...), as 16 hex digits.
pub fn fingerprint(config: &PipelineConfig, label: &str) -> String {
    let json = serde_json::to_string(config).unwrap_or_default();
    let mut h = FnvHasher::default();
    h.write(json.as_bytes());
    h.write(label.as_bytes());
    format!("{:016x}", h.finish())
}

/// Every case in order, sequentially.
pub fn run_experiment(
    pipeline: &Pipeline,
    queries: &[EvalQuery],
    set: QuerySet,
    overrides: &QueryOverrides,
    backend: &str,
) -> MetricsReport {
    let outcomes =
        cases(queries, set).into_iter().map(|(q, lang)| evaluate_query(pipeline, q, lang, overrides)).collect();
    let fp = fingerprint(&pipeline.effective_config(overrides), backend);
    MetricsReport::from_outcomes(outcomes, fp, backend.to_string())
}

/// 0.0, 0.1, ..., 1.0.
pub fn default_alpha_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

pub fn alpha_sweep(
    pipeline: &Pipeline,
    queries: &[EvalQuery],
    set: QuerySet,
    alphas: &[f64],
    backend: &str,
) -> Vec<(f64, MetricsReport)> {
    alphas
        .iter()
        .map(|&alpha| {
            let o = QueryOverrides { alpha: Some(alpha), ..Default::default() };
            (alpha, run_experiment(pipeline, queries, set, &o, backend))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Baseline,
    NoTranslator,
    NoRouter,
    NoPostprocessors,
}

impl Variant {
    pub const ABLATIONS: [Variant; 3] = [Variant::NoTranslator, Variant::NoRouter, Variant::NoPostprocessors];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::NoTranslator => "no_translator",
            Variant::NoRouter => "no_router",
            Variant::NoPostprocessors => "no_postprocessors",
        }
    }

    pub fn ablation(self) -> Ablation {
        Ablation {
            translator: self == Variant::NoTranslator,
            router: self == Variant::NoRouter,
            postprocessors: self == Variant::NoPostprocessors,
        }
    }
}

impl core::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Variant::Baseline, Variant::NoTranslator, Variant::NoRouter, Variant::NoPostprocessors]
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown variant {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: Variant,
    pub summary: GroupSummary,
    /// variant − baseline, in percentage points; zero for the baseline.
    pub delta: Metrics4,
}

/// Precision, recall, F1 and hit rate differences.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics4 {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub hit_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub rows: Vec<AblationRow>,
    pub reports: Vec<(Variant, MetricsReport)>,
}

impl AblationTable {
    pub fn row(&self, v: Variant) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.variant == v)
    }
}

/// Baseline plus one run per requested variant, each compared on the
/// per-query average.
pub fn run_ablation(
    pipeline: &Pipeline,
    queries: &[EvalQuery],
    set: QuerySet,
    variants: &[Variant],
    backend: &str,
) -> AblationTable {
    let mut reports = Vec::new();
    let mut order = alloc::vec![Variant::Baseline];
    order.extend(variants.iter().copied().filter(|v| *v != Variant::Baseline));
    for v in order {
        let o = QueryOverrides { ablation: Some(v.ablation()), ..Default::default() };
        reports.push((v, run_experiment(pipeline, queries, set, &o, backend)));
    }
    AblationTable::from_reports(reports)
}

impl AblationTable {
    /// The first report is the baseline.
    pub fn from_reports(reports: Vec<(Variant, MetricsReport)>) -> Self {
        let base = reports.first().map(|(_, r)| r.overall.clone());
        let rows = reports
            .iter()
            .map(|(v, r)| {
                let s = r.overall.clone();
                let delta = match &base {
                    Some(b) => Metrics4 {
                        precision: s.precision - b.precision,
                        recall: s.recall - b.recall,
                        f1: s.f1 - b.f1,
                        hit_rate: s.hit_rate - b.hit_rate,
                    },
                    None => Metrics4::default(),
                };
                AblationRow { variant: *v, summary: s, delta }
            })
            .collect();
        AblationTable { rows, reports }
    }
}
