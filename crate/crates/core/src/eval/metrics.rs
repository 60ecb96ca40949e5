use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::generate::QueryType;
use super::run::QueryLanguage;
use crate::corpus::FileType;
use crate::pipeline::Stage;
use crate::synthesis::Degradation;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub hit: bool,
}

/// Precision over the retrieved set, recall over the relevant set, F1 as
/// 2|∩| / (|R| + |G|) (the harmonic mean, without intermediate rounding).
/// Empty denominators give 0.
pub fn compute_metrics(retrieved: &[String], relevant: &BTreeSet<String>) -> Metrics {
    let r: BTreeSet<&String> = retrieved.iter().collect();
    let inter = r.iter().filter(|id| relevant.contains(**id)).count();
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    Metrics {
        precision: ratio(inter, r.len()),
        recall: ratio(inter, relevant.len()),
        f1: ratio(2 * inter, r.len() + relevant.len()),
        hit: inter > 0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub query_id: String,
    pub query_type: QueryType,
    pub language: QueryLanguage,
    pub topic: String,
    pub target_types: BTreeSet<FileType>,
    pub query_text: String,
    pub retrieved_ids: Vec<String>,
    pub relevant_count: usize,
    pub metrics: Metrics,
    pub degradations: BTreeSet<Degradation>,
    pub error: Option<String>,
    pub stage_ms: BTreeMap<Stage, f64>,
    pub total_ms: f64,
}

/// Mean metrics of a group of queries, as percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub label: String,
    pub queries: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub hit_rate: f64,
}

impl GroupSummary {
    /// Sums run in the given order, then divide and scale by 100.
    pub fn from_outcomes<'a>(label: &str, outcomes: impl IntoIterator<Item = &'a QueryOutcome>) -> Self {
        let (mut n, mut p, mut r, mut f, mut h) = (0usize, 0.0, 0.0, 0.0, 0usize);
        for o in outcomes {
            n += 1;
            p += o.metrics.precision;
            r += o.metrics.recall;
            f += o.metrics.f1;
            h += o.metrics.hit as usize;
        }
        let mean = |s: f64| if n == 0 { 0.0 } else { s / n as f64 * 100.0 };
        GroupSummary {
            label: label.to_string(),
            queries: n,
            precision: mean(p),
            recall: mean(r),
            f1: mean(f),
            hit_rate: mean(h as f64),
        }
    }

    /// Unweighted mean of group means.
    pub fn mean_of(label: &str, groups: &[GroupSummary]) -> Self {
        let n = groups.len();
        let mean = |get: fn(&GroupSummary) -> f64| {
            if n == 0 {
                0.0
            } else {
                groups.iter().map(get).sum::<f64>() / n as f64
            }
        };
        GroupSummary {
            label: label.to_string(),
            queries: groups.iter().map(|g| g.queries).sum(),
            precision: mean(|g| g.precision),
            recall: mean(|g| g.recall),
            f1: mean(|g| g.f1),
            hit_rate: mean(|g| g.hit_rate),
        }
    }
}

/// Per-query rows plus the summary grouped by query type: one row per type
/// present, the per-query (micro) average and the mean of the group means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_query: Vec<QueryOutcome>,
    pub groups: Vec<GroupSummary>,
    pub overall: GroupSummary,
    pub macro_average: GroupSummary,
    pub config_fingerprint: String,
    pub backend: String,
}

impl MetricsReport {
    /// Outcomes may arrive in any order; rows are sorted by query id, then
    /// language (English first).
    pub fn from_outcomes(mut per_query: Vec<QueryOutcome>, config_fingerprint: String, backend: String) -> Self {
        per_query.sort_by(|a, b| (&a.query_id, a.language).cmp(&(&b.query_id, b.language)));
        let groups: Vec<GroupSummary> = QueryType::ALL
            .iter()
            .filter(|t| per_query.iter().any(|o| o.query_type == **t))
            .map(|t| GroupSummary::from_outcomes(t.as_str(), per_query.iter().filter(|o| o.query_type == *t)))
            .collect();
        let overall = GroupSummary::from_outcomes("average", &per_query);
        let macro_average = GroupSummary::mean_of("group_average", &groups);
        MetricsReport { per_query, groups, overall, macro_average, config_fingerprint, backend }
    }

    /// Group rows, then the micro and macro averages.
    pub fn summary_rows(&self) -> Vec<&GroupSummary> {
        self.groups.iter().chain([&self.overall, &self.macro_average]).collect()
    }
}
