//! HTTP API.
//!
//! - `POST /v1/query` with `{query, alpha?, k?, branch_k?, ablation?: {translator?, router?, postprocessors?}}`
//!   returns `{text, file_ids, file_urls, language, translation_degraded, degradations, trace}`.
//! - `GET /healthz`: 200 once the index is loaded, 503 before.
//! - `GET /v1/config`: the effective configuration, redacted.
//! - `/ui/`: the browser UI bundle, when `server.ui_dir` is set.

use std::collections::BTreeSet;
use std::sync::{Arc, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use smartsearch_core::language::LanguageTag;
use smartsearch_core::pipeline::{Ablation, Pipeline, QueryOverrides, QueryTrace};
use smartsearch_core::synthesis::Degradation;
use tower_http::services::ServeDir;
use tracing::{error, info};

use crate::app::open_pipeline;
use crate::config::AppConfig;

pub struct AppState {
    config: AppConfig,
    pipeline: RwLock<Option<Arc<Pipeline>>>,
}

impl AppState {
    pub fn new(config: AppConfig) -> Self {
        AppState { config, pipeline: RwLock::new(None) }
    }

    pub fn with_pipeline(config: AppConfig, pipeline: Pipeline) -> Self {
        let s = AppState::new(config);
        s.set_pipeline(pipeline);
        s
    }

    pub fn set_pipeline(&self, pipeline: Pipeline) {
        *self.pipeline.write().expect("pipeline lock") = Some(Arc::new(pipeline));
    }

    pub fn pipeline(&self) -> Option<Arc<Pipeline>> {
        self.pipeline.read().expect("pipeline lock").clone()
    }

    pub fn config(&self) -> &AppConfig {
        &self.config
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRequest {
    pub query: String,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub branch_k: Option<usize>,
    #[serde(default)]
    pub ablation: Option<Ablation>,
}

impl QueryRequest {
    pub fn overrides(&self) -> Result<QueryOverrides, String> {
        if self.query.trim().is_empty() {
            return Err("query must not be empty".into());
        }
        if let Some(a) = self.alpha {
            if !(0.0..=1.0).contains(&a) {
                return Err(format!("alpha must lie in [0, 1], got {a}"));
            }
        }
        if self.k == Some(0) {
            return Err("k must be at least 1".into());
        }
        if self.branch_k == Some(0) {
            return Err("branch_k must be at least 1".into());
        }
        Ok(QueryOverrides { alpha: self.alpha, k: self.k, branch_k: self.branch_k, ablation: self.ablation })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub text: String,
    pub file_ids: Vec<String>,
    /// Links built from the configured URL template; empty without one.
    pub file_urls: Vec<String>,
    pub language: LanguageTag,
    pub translation_degraded: bool,
    pub degradations: BTreeSet<Degradation>,
    pub trace: QueryTrace,
}

#[derive(Debug)]
pub enum ApiError {
    BadRequest(String),
    IndexNotReady,
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code, message) = match self {
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, "bad_request", m),
            ApiError::IndexNotReady => (
                StatusCode::SERVICE_UNAVAILABLE,
                "index_not_ready",
                "the index is not loaded yet; run ingest or wait for startup".to_string(),
            ),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, "internal", m),
        };
        (status, Json(json!({"error": message, "code": code}))).into_response()
    }
}

async fn healthz(State(state): State<Arc<AppState>>) -> Response {
    match state.pipeline() {
        Some(p) => Json(json!({"status": "ready", "chunks": p.indices().chunks().count(), "files": p.corpus().len()}))
            .into_response(),
        None => (StatusCode::SERVICE_UNAVAILABLE, Json(json!({"status": "index_not_ready"}))).into_response(),
    }
}

async fn config(State(state): State<Arc<AppState>>) -> Json<Value> {
    Json(state.config.redacted())
}

async fn query(
    State(state): State<Arc<AppState>>,
    body: Result<Json<QueryRequest>, JsonRejection>,
) -> Result<Json<QueryResponse>, ApiError> {
    let Json(req) = body.map_err(|e| ApiError::BadRequest(e.body_text()))?;
    let overrides = req.overrides().map_err(ApiError::BadRequest)?;
    let pipeline = state.pipeline().ok_or(ApiError::IndexNotReady)?;
    let q = req.query.clone();
    let (response, trace) = tokio::task::spawn_blocking(move || pipeline.query(&q, &overrides))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
        .map_err(|e| ApiError::BadRequest(e.to_string()))?;
    let file_urls = response.cited_file_ids.iter().filter_map(|id| state.config.file_url(id)).collect();
    Ok(Json(QueryResponse {
        text: response.text,
        file_ids: response.cited_file_ids,
        file_urls,
        language: trace.language.clone(),
        translation_degraded: trace.translation_degraded,
        degradations: response.degradation_flags,
        trace,
    }))
}

pub fn router(state: Arc<AppState>) -> Router {
    let mut r =
        Router::new().route("/healthz", get(healthz)).route("/v1/query", post(query)).route("/v1/config", get(config));
    if let Some(dir) = &state.config.server.ui_dir {
        r = r.nest_service("/ui", ServeDir::new(dir).append_index_html_on_directories(true));
    }
    r.with_state(state)
}

/// Bind, load the index in the background, and serve until ctrl-c or
/// SIGTERM. Health reports 503 until the index is loaded.
pub async fn serve(config: AppConfig) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(&config.server.bind)
        .await
        .map_err(|e| anyhow::anyhow!("cannot bind {}: {e}", config.server.bind))?;
    info!(addr = %listener.local_addr()?, "listening");
    let state = Arc::new(AppState::new(config));
    let loader = Arc::clone(&state);
    tokio::task::spawn_blocking(move || match open_pipeline(&loader.config) {
        Ok(p) => {
            loader.set_pipeline(p);
            info!("index loaded; ready");
        }
        Err(e) => error!("index not loaded: {e:#}"),
    });
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown_signal()).await?;
    info!("shut down");
    Ok(())
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        if let Ok(mut s) = tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            s.recv().await;
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}
