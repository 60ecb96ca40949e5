//! CSV output of evaluation runs.
//!
//! Column order is fixed so goldens diff cleanly. Rates are percentages,
//! per-query metrics fractions, all printed with six decimals. Timing
//! columns end in `_ms` and are the only ones that vary between runs.
//!
//! - `report.csv`: query_id, query_type, language, topic, target_types,
//!   query_text, retrieved_ids, relevant_count, precision, recall, f1, hit,
//!   degradations, error, one `<stage>_ms` column per pipeline stage, total_ms
//! - `summary.csv`: group, queries, precision, recall, f1, hit_rate, backend
//! - `sweep.csv`: alpha, queries, precision, recall, f1, hit_rate
//! - `ablation.csv`: variant, precision, recall, f1, hit_rate, then the
//!   variant − baseline difference of each, marked ↑ or ↓

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use smartsearch_core::eval::{AblationTable, GroupSummary, MetricsReport};
use smartsearch_core::pipeline::Stage;

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

fn enum_name<T: serde::Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}

pub fn report_header() -> Vec<String> {
    let mut h: Vec<String> = [
        "query_id",
        "query_type",
        "language",
        "topic",
        "target_types",
        "query_text",
        "retrieved_ids",
        "relevant_count",
        "precision",
        "recall",
        "f1",
        "hit",
        "degradations",
        "error",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend(Stage::ALL.iter().map(|s| format!("{}_ms", s.as_str())));
    h.push("total_ms".into());
    h
}

pub fn write_report_csv<W: Write>(w: W, report: &MetricsReport) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(report_header())?;
    for o in &report.per_query {
        let mut row = vec![
            o.query_id.clone(),
            o.query_type.as_str().to_string(),
            o.language.as_str().to_string(),
            o.topic.clone(),
            o.target_types.iter().map(|t| t.as_str()).collect::<Vec<_>>().join("|"),
            o.query_text.clone(),
            o.retrieved_ids.join(" "),
            o.relevant_count.to_string(),
            f6(o.metrics.precision),
            f6(o.metrics.recall),
            f6(o.metrics.f1),
            o.metrics.hit.to_string(),
            o.degradations.iter().map(enum_name).collect::<Vec<_>>().join("|"),
            o.error.clone().unwrap_or_default(),
        ];
        row.extend(Stage::ALL.iter().map(|s| format!("{:.3}", o.stage_ms.get(s).copied().unwrap_or(0.0))));
        row.push(format!("{:.3}", o.total_ms));
        out.write_record(row)?;
    }
    out.flush()?;
    Ok(())
}

fn summary_fields(g: &GroupSummary) -> [String; 5] {
    [g.queries.to_string(), f6(g.precision), f6(g.recall), f6(g.f1), f6(g.hit_rate)]
}

pub fn write_summary_csv<W: Write>(w: W, report: &MetricsReport) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["group", "queries", "precision", "recall", "f1", "hit_rate", "backend"])?;
    for g in report.summary_rows() {
        let mut row = vec![g.label.clone()];
        row.extend(summary_fields(g));
        row.push(report.backend.clone());
        out.write_record(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(w: W, rows: &[(f64, MetricsReport)]) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["alpha", "queries", "precision", "recall", "f1", "hit_rate"])?;
    for (alpha, r) in rows {
        let mut row = vec![format!("{alpha:.1}")];
        row.extend(summary_fields(&r.overall));
        out.write_record(row)?;
    }
    out.flush()?;
    Ok(())
}

/// `↑1.25`, `↓0.50`, or `0.00`, in percentage points.
pub fn arrow(delta: f64) -> String {
    let rounded = format!("{:.2}", delta.abs());
    if rounded == "0.00" {
        rounded
    } else if delta > 0.0 {
        format!("↑{rounded}")
    } else {
        format!("↓{rounded}")
    }
}

pub fn write_ablation_csv<W: Write>(w: W, table: &AblationTable) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "variant",
        "queries",
        "precision",
        "recall",
        "f1",
        "hit_rate",
        "delta_precision",
        "delta_recall",
        "delta_f1",
        "delta_hit_rate",
    ])?;
    for r in &table.rows {
        let mut row = vec![r.variant.as_str().to_string()];
        row.extend(summary_fields(&r.summary));
        let d = r.delta;
        row.extend([arrow(d.precision), arrow(d.recall), arrow(d.f1), arrow(d.hit_rate)]);
        out.write_record(row)?;
    }
    out.flush()?;
    Ok(())
}

fn create(dir: &Path, name: &str) -> anyhow::Result<fs::File> {
    let path = dir.join(name);
    fs::File::create(&path).with_context(|| format!("cannot create {}", path.display()))
}

/// `report.csv` and `summary.csv` for one run.
pub fn write_run(dir: &Path, report: &MetricsReport) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    write_report_csv(create(dir, "report.csv")?, report)?;
    write_summary_csv(create(dir, "summary.csv")?, report)
}

pub fn write_sweep(dir: &Path, rows: &[(f64, MetricsReport)]) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    write_sweep_csv(create(dir, "sweep.csv")?, rows)
}

pub fn write_ablation(dir: &Path, table: &AblationTable) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    write_ablation_csv(create(dir, "ablation.csv")?, table)?;
    if let Some((_, base)) = table.reports.first() {
        write_run(dir, base)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arrows() {
        assert_eq!(arrow(38.9), "↑38.90");
        assert_eq!(arrow(-0.004), "0.00");
        assert_eq!(arrow(-1.0), "↓1.00");
    }

    #[test]
    fn header_has_one_timing_column_per_stage() {
        let h = report_header();
        assert_eq!(h.iter().filter(|c| c.ends_with("_ms")).count(), 7);
        assert_eq!(h.last().map(String::as_str), Some("total_ms"));
    }
}
