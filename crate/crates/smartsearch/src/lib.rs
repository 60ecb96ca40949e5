//! Archive smart search: the operational shell around `smartsearch-core`.
//!
//! Corpus and index files, HTTP provider backends, TOML configuration,
//! CSV reports, the axum service and the CLI.

pub use smartsearch_core as core;

pub mod app;
pub mod cli;
pub mod config;
pub mod corpus_io;
pub mod http;
pub mod persistence;
pub mod report;
pub mod service;
