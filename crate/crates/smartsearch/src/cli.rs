//! Command-line interface.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use smartsearch_core::eval::{default_alpha_grid, generate_corpus, generate_queries, MetricsReport, QuerySet, Variant};
use smartsearch_core::pipeline::QueryOverrides;
use smartsearch_core::providers::Backend;

use crate::app::{
    benchmark_topics, ingest, open_pipeline, prepare_bench, run_ablation_parallel, run_eval, run_sweep, RunLabel,
    SYNTHETIC_PER_CELL,
};
use crate::config::AppConfig;
use crate::corpus_io::write_corpus;
use crate::report;

#[derive(Debug, Parser)]
#[command(name = "smartsearch", version, about = "LLM-augmented smart search over archive collections")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Use this backend for every provider, overriding the config file.
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendArg>,
    /// Seed of the synthetic benchmark corpus.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Keep unknown corpus keys instead of rejecting them.
    #[arg(long, global = true)]
    pub lax: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Mock,
    Http,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QuerySetArg {
    En,
    Ko,
    Both,
}

impl From<QuerySetArg> for QuerySet {
    fn from(a: QuerySetArg) -> Self {
        match a {
            QuerySetArg::En => QuerySet::English,
            QuerySetArg::Ko => QuerySet::Korean,
            QuerySetArg::Both => QuerySet::Bilingual,
        }
    }
}

/// Retrieval and post-processing parameters.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// Fusion weight: 0 is BM25 only, 1 is vector only.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Nodes kept after fusion and merging.
    #[arg(long)]
    pub k: Option<usize>,
    /// Candidates taken from each retrieval branch.
    #[arg(long)]
    pub branch_k: Option<usize>,
    #[arg(long)]
    pub no_rerank: bool,
    #[arg(long)]
    pub no_reorder: bool,
    #[arg(long)]
    pub rerank_top_n: Option<usize>,
}

impl ParamArgs {
    fn apply(&self, cfg: &mut AppConfig) {
        if let Some(a) = self.alpha {
            cfg.retrieval.alpha = a;
        }
        if let Some(k) = self.k {
            cfg.retrieval.final_k = k;
        }
        if let Some(k) = self.branch_k {
            cfg.retrieval.top_k_per_branch = k;
        }
        if self.no_rerank {
            cfg.postprocess.rerank_enabled = false;
        }
        if self.no_reorder {
            cfg.postprocess.reorder_enabled = false;
        }
        if let Some(n) = self.rerank_top_n {
            cfg.postprocess.rerank_top_n = n;
        }
    }
}

/// Benchmark corpus and query selection.
#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Corpus file; defaults to the configured one, else the synthetic corpus.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Allow a topic count other than ten.
    #[arg(long)]
    pub free_size: bool,
    /// Output directory for CSV files.
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load, index and persist a corpus.
    Ingest {
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Generate missing text representations with the LLM.
        #[arg(long)]
        enrich: bool,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        bind: Option<String>,
        #[arg(long)]
        ui_dir: Option<PathBuf>,
    },
    /// Answer one query against the persisted index.
    Query {
        text: String,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        no_translator: bool,
        #[arg(long)]
        no_router: bool,
        #[arg(long)]
        no_postprocessors: bool,
        /// Print the response and trace as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run the benchmark once and write report.csv and summary.csv.
    Eval {
        #[command(flatten)]
        bench: BenchArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value = "en")]
        queries: QuerySetArg,
    },
    /// Run the benchmark for each alpha and write sweep.csv.
    SweepAlpha {
        #[command(flatten)]
        bench: BenchArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Comma-separated alphas; defaults to 0.0, 0.1, ..., 1.0.
        #[arg(long, value_delimiter = ',')]
        alphas: Vec<f64>,
        #[arg(long, value_enum, default_value = "en")]
        queries: QuerySetArg,
    },
    /// Run the baseline and each ablation variant and write ablation.csv.
    Ablate {
        #[command(flatten)]
        bench: BenchArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Comma-separated: no_translator, no_router, no_postprocessors.
        #[arg(long, value_delimiter = ',', default_value = "no_translator,no_router,no_postprocessors")]
        variants: Vec<String>,
        /// Korean by default: removing the translator only matters for
        /// queries that are not in English.
        #[arg(long, value_enum, default_value = "ko")]
        queries: QuerySetArg,
    },
    /// Write the synthetic benchmark corpus as JSON lines.
    GenCorpus {
        #[arg(long, default_value_t = SYNTHETIC_PER_CELL)]
        per_cell: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the benchmark queries as JSON lines (stdout without --out).
    GenQueries {
        #[arg(long)]
        free_size: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> anyhow::Result<AppConfig> {
    let mut cfg = match &cli.config {
        Some(p) => AppConfig::load(p)?,
        None => AppConfig::default(),
    };
    cfg.apply_env(|k| std::env::var(k).ok().filter(|v| !v.is_empty()));
    if let Some(b) = cli.backend {
        cfg.set_backend(match b {
            BackendArg::Mock => Backend::Mock,
            BackendArg::Http => Backend::Http,
        });
    }
    if cli.lax {
        cfg.lax = true;
    }
    Ok(cfg)
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = load_config(&cli)?;
    match cli.command {
        Command::Ingest { corpus, enrich } => {
            cfg.validate()?;
            let path = corpus
                .or_else(|| cfg.corpus_path.clone())
                .context("no corpus: pass --corpus or set corpus_path in the config")?;
            let m = ingest(&cfg, &path, enrich)?;
            println!("indexed {} files into {} ({} dims)", m.files, cfg.index_dir.display(), m.dims);
            for (ft, c) in &m.per_type {
                println!("  {ft}: {} chunks, {} terms", c.chunks, c.terms);
            }
        }
        Command::Serve { bind, ui_dir } => {
            if let Some(b) = bind {
                cfg.server.bind = b;
            }
            if ui_dir.is_some() {
                cfg.server.ui_dir = ui_dir;
            }
            cfg.validate()?;
            let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            rt.block_on(crate::service::serve(cfg))?;
        }
        Command::Query { text, params, no_translator, no_router, no_postprocessors, json } => {
            params.apply(&mut cfg);
            cfg.ablation.translator |= no_translator;
            cfg.ablation.router |= no_router;
            cfg.ablation.postprocessors |= no_postprocessors;
            cfg.validate()?;
            let pipeline = open_pipeline(&cfg)?;
            let (resp, trace) = pipeline.query(&text, &QueryOverrides::default())?;
            if json {
                let v = json!({"text": resp.text, "file_ids": resp.cited_file_ids, "language": trace.language,
                    "translation_degraded": trace.translation_degraded, "degradations": resp.degradation_flags, "trace": trace});
                println!("{}", serde_json::to_string_pretty(&v)?);
            } else {
                println!("{}", resp.text);
                for id in &resp.cited_file_ids {
                    match cfg.file_url(id) {
                        Some(u) => println!("  {id}  {u}"),
                        None => println!("  {id}"),
                    }
                }
            }
        }
        Command::Eval { bench, params, queries } => {
            params.apply(&mut cfg);
            cfg.validate()?;
            let (pipeline, qs, run) = prepare_bench(&cfg, bench.corpus.clone(), bench.free_size, cli.seed)?;
            let report = run_eval(&pipeline, &qs, queries.into(), &QueryOverrides::default(), &run);
            report::write_run(&bench.out, &report)?;
            write_run_json(&bench.out, &cfg, &run, cli.seed, &report)?;
            print_summary(&report);
            println!("wrote {}", bench.out.display());
        }
        Command::SweepAlpha { bench, params, alphas, queries } => {
            params.apply(&mut cfg);
            cfg.validate()?;
            let alphas = if alphas.is_empty() { default_alpha_grid() } else { alphas };
            if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
                bail!("alpha {a} outside [0, 1]");
            }
            let (pipeline, qs, run) = prepare_bench(&cfg, bench.corpus.clone(), bench.free_size, cli.seed)?;
            let rows = run_sweep(&pipeline, &qs, queries.into(), &alphas, &run);
            report::write_sweep(&bench.out, &rows)?;
            println!("{:>5}  {:>8} {:>8} {:>8} {:>8}", "alpha", "P", "R", "F1", "hit");
            for (a, r) in &rows {
                let o = &r.overall;
                println!("{a:>5.1}  {:>8.2} {:>8.2} {:>8.2} {:>8.2}", o.precision, o.recall, o.f1, o.hit_rate);
            }
            println!("wrote {}", bench.out.join("sweep.csv").display());
        }
        Command::Ablate { bench, params, variants, queries } => {
            params.apply(&mut cfg);
            cfg.validate()?;
            let variants: Vec<Variant> = variants
                .iter()
                .map(|v| v.trim().parse::<Variant>().map_err(anyhow::Error::msg))
                .collect::<anyhow::Result<_>>()?;
            let (pipeline, qs, run) = prepare_bench(&cfg, bench.corpus.clone(), bench.free_size, cli.seed)?;
            let table = run_ablation_parallel(&pipeline, &qs, queries.into(), &variants, &run);
            report::write_ablation(&bench.out, &table)?;
            println!(
                "{:<18} {:>8} {:>8} {:>8} {:>8}   {:>8} {:>8} {:>8}",
                "variant", "P", "R", "F1", "hit", "dP", "dR", "dF1"
            );
            for r in &table.rows {
                let s = &r.summary;
                println!(
                    "{:<18} {:>8.2} {:>8.2} {:>8.2} {:>8.2}   {:>8} {:>8} {:>8}",
                    r.variant.as_str(),
                    s.precision,
                    s.recall,
                    s.f1,
                    s.hit_rate,
                    report::arrow(r.delta.precision),
                    report::arrow(r.delta.recall),
                    report::arrow(r.delta.f1)
                );
            }
            println!("wrote {}", bench.out.join("ablation.csv").display());
        }
        Command::GenCorpus { per_cell, out } => {
            if per_cell == 0 {
                bail!("--per-cell must be at least 1");
            }
            let corpus = generate_corpus(&benchmark_topics(&cfg), per_cell, cli.seed);
            write_corpus(&out, &corpus)?;
            println!("wrote {} files to {}", corpus.len(), out.display());
        }
        Command::GenQueries { free_size, out } => {
            let qs = generate_queries(&benchmark_topics(&cfg), !free_size)?;
            let mut text = String::new();
            for q in &qs {
                text.push_str(&serde_json::to_string(q)?);
                text.push('\n');
            }
            match out {
                Some(p) => {
                    fs::write(&p, text).with_context(|| format!("cannot write {}", p.display()))?;
                    println!("wrote {} queries to {}", qs.len(), p.display());
                }
                None => std::io::stdout().write_all(text.as_bytes())?,
            }
        }
    }
    Ok(())
}

fn write_run_json(
    dir: &Path,
    cfg: &AppConfig,
    run: &RunLabel,
    seed: u64,
    report: &MetricsReport,
) -> anyhow::Result<()> {
    let v = json!({
        "config_fingerprint": report.config_fingerprint,
        "backend": run.backend,
        "source": run.source,
        "seed": seed,
        "cases": report.per_query.len(),
        "config": cfg.redacted(),
    });
    let path = dir.join("run.json");
    fs::write(&path, serde_json::to_string_pretty(&v)?).with_context(|| format!("cannot write {}", path.display()))
}

fn print_summary(report: &MetricsReport) {
    println!("{:<16} {:>7} {:>8} {:>8} {:>8} {:>8}", "group", "queries", "P", "R", "F1", "hit");
    for g in report.summary_rows() {
        println!(
            "{:<16} {:>7} {:>8.2} {:>8.2} {:>8.2} {:>8.2}",
            g.label, g.queries, g.precision, g.recall, g.f1, g.hit_rate
        );
    }
    println!("backend {} | fingerprint {}", report.backend, report.config_fingerprint);
}
