//! Benchmark generation, metrics over cited file IDs, and the experiment
//! runners (single run, alpha sweep, ablation).

mod generate;
mod metrics;
mod run;

pub use generate::{
    generate_corpus, generate_queries, relevant_ids, EvalQuery, QueryType, DEFAULT_TOPICS, STRICT_TOPIC_COUNT,
};
pub use metrics::{compute_metrics, GroupSummary, Metrics, MetricsReport, QueryOutcome};
pub use run::{
    alpha_sweep, cases, default_alpha_grid, evaluate_query, fingerprint, run_ablation, run_experiment, AblationRow,
    AblationTable, Metrics4, QueryLanguage, QuerySet, Variant,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("the benchmark needs exactly {expected} topics, got {got}")]
    TopicCountMismatch { expected: usize, got: usize },
}
