//! HTTP-backed providers.
//!
//! Wire shapes:
//! - LLM: chat completions. `{model, messages: [{role: "user", content}], temperature: 0}`
//!   answered by `{choices: [{message: {content}}]}`.
//! - Embedding: `{model, input}` answered by `{data: [{embedding: [..]}]}`.
//! - Translation: `{q, source, target, format: "text"}` answered by `{translatedText}`.
//! - Detection: `{q}` answered by `[{language, confidence}]`, confidence on a 0-100 scale.
//! - Rerank: `{model, query, documents}` answered by `{results: [{index, relevance_score}]}`.
//!
//! An API key, when its environment variable is set, is sent as a bearer
//! token. One call never takes longer than `timeout × (max_retries + 1)`:
//! every attempt and backoff sleep draws from that single budget.

use std::sync::OnceLock;
use std::thread;
use std::time::{Duration, Instant};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use smartsearch_core::indexing::EmbeddingVector;
use smartsearch_core::language::LanguageTag;
use smartsearch_core::providers::{
    DetectionProvider, EmbeddingProvider, LlmProvider, ProviderConfig, ProviderError, RerankProvider,
    TranslationProvider,
};
use tracing::{debug, warn};

const BASE_BACKOFF: Duration = Duration::from_millis(100);

/// Shared request machinery for every HTTP provider.
#[derive(Debug, Clone)]
pub struct HttpClient {
    agent: ureq::Agent,
    endpoint: String,
    api_key: Option<String>,
    model: Option<String>,
    timeout: Duration,
    max_retries: u32,
}

impl HttpClient {
    /// The API key is read from `cfg.auth_env_var` now, never stored in config.
    pub fn new(cfg: &ProviderConfig) -> Result<Self, ProviderError> {
        let endpoint = cfg
            .endpoint
            .clone()
            .filter(|e| !e.is_empty())
            .ok_or_else(|| ProviderError::Failed(format!("{} endpoint not configured", cfg.kind.env_name())))?;
        let api_key = cfg.auth_env_var.as_deref().and_then(|v| std::env::var(v).ok()).filter(|k| !k.is_empty());
        let agent: ureq::Agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
        Ok(HttpClient {
            agent,
            endpoint,
            api_key,
            model: cfg.model_id.clone(),
            timeout: Duration::from_millis(cfg.timeout_ms.max(1)),
            max_retries: cfg.max_retries,
        })
    }

    pub fn model(&self) -> &str {
        self.model.as_deref().unwrap_or("default")
    }

    /// Upper bound on the wall time of one `post_json` call.
    pub fn deadline(&self) -> Duration {
        self.timeout * (self.max_retries + 1)
    }

    pub fn post_json<B: Serialize, R: DeserializeOwned>(&self, body: &B) -> Result<R, ProviderError> {
        let start = Instant::now();
        let budget = self.deadline();
        let mut attempt = 0;
        loop {
            let remaining = budget.saturating_sub(start.elapsed());
            if remaining.is_zero() {
                return Err(ProviderError::Timeout);
            }
            let err = match self.attempt(body, remaining.min(self.timeout)) {
                Ok(r) => return Ok(r),
                Err(e) => e,
            };
            if !retryable(&err) || attempt >= self.max_retries {
                return Err(err);
            }
            let backoff = BASE_BACKOFF * 2u32.saturating_pow(attempt);
            let remaining = budget.saturating_sub(start.elapsed());
            if backoff >= remaining {
                return Err(err);
            }
            warn!(endpoint = %self.endpoint, attempt, error = %err, "retrying provider call");
            thread::sleep(backoff);
            attempt += 1;
        }
    }

    fn attempt<B: Serialize, R: DeserializeOwned>(&self, body: &B, timeout: Duration) -> Result<R, ProviderError> {
        let mut req = self
            .agent
            .post(&self.endpoint)
            .config()
            .timeout_global(Some(timeout))
            .build()
            .header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = req.send_json(body).map_err(map_ureq)?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(map_ureq)?;
        debug!(endpoint = %self.endpoint, status, "provider response");
        if !(200..300).contains(&status) {
            let body: String = text.chars().take(200).collect();
            return Err(ProviderError::Status { code: status, body });
        }
        serde_json::from_str(&text).map_err(|e| ProviderError::Malformed(e.to_string()))
    }
}

fn map_ureq(e: ureq::Error) -> ProviderError {
    match e {
        ureq::Error::Timeout(_) => ProviderError::Timeout,
        ureq::Error::StatusCode(code) => ProviderError::Status { code, body: String::new() },
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => ProviderError::Timeout,
        other => ProviderError::Transport(other.to_string()),
    }
}

fn retryable(e: &ProviderError) -> bool {
    match e {
        ProviderError::Timeout | ProviderError::Transport(_) => true,
        ProviderError::Status { code, .. } => *code == 429 || *code >= 500,
        _ => false,
    }
}

#[derive(Deserialize)]
struct ChatReply {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: String,
}

#[derive(Debug, Clone)]
pub struct HttpLlm(pub HttpClient);

impl LlmProvider for HttpLlm {
    fn complete(&self, prompt: &str) -> Result<String, ProviderError> {
        let body = json!({
            "model": self.0.model(),
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
        });
        let reply: ChatReply = self.0.post_json(&body)?;
        reply
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| ProviderError::Malformed("no choices".into()))
    }
}

#[derive(Deserialize)]
struct EmbeddingReply {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    embedding: Vec<f64>,
}

/// Embedding endpoint. With no configured dimension the first `dims` call
/// probes the endpoint once and remembers the answer.
#[derive(Debug)]
pub struct HttpEmbedder {
    client: HttpClient,
    dims: OnceLock<usize>,
}

impl HttpEmbedder {
    pub fn new(client: HttpClient, dims: Option<usize>) -> Self {
        let cell = OnceLock::new();
        if let Some(d) = dims {
            let _ = cell.set(d);
        }
        HttpEmbedder { client, dims: cell }
    }
}

impl EmbeddingProvider for HttpEmbedder {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, ProviderError> {
        if text.trim().is_empty() {
            return Err(ProviderError::EmptyInput);
        }
        let body = json!({"model": self.client.model(), "input": text});
        let reply: EmbeddingReply = self.client.post_json(&body)?;
        let v = reply
            .data
            .into_iter()
            .next()
            .map(|d| d.embedding)
            .ok_or_else(|| ProviderError::Malformed("no embedding data".into()))?;
        if let Some(&d) = self.dims.get() {
            if v.len() != d {
                return Err(ProviderError::Malformed(format!("expected {d} dimensions, got {}", v.len())));
            }
        }
        Ok(EmbeddingVector(v))
    }

    fn dims(&self) -> usize {
        *self.dims.get_or_init(|| match self.embed("dimension probe") {
            Ok(v) => v.dims(),
            Err(e) => {
                warn!(error = %e, "embedding dimension probe failed");
                0
            }
        })
    }
}

#[derive(Deserialize)]
struct TranslateReply {
    #[serde(rename = "translatedText")]
    translated_text: String,
}

#[derive(Debug, Clone)]
pub struct HttpTranslator(pub HttpClient);

impl TranslationProvider for HttpTranslator {
    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String, ProviderError> {
        if source == target {
            return Ok(text.to_string());
        }
        let body = json!({"q": text, "source": source, "target": target, "format": "text"});
        let reply: TranslateReply = self.0.post_json(&body)?;
        Ok(reply.translated_text)
    }
}

#[derive(Deserialize)]
struct DetectDatum {
    language: String,
    confidence: f64,
}

#[derive(Debug, Clone)]
pub struct HttpDetector(pub HttpClient);

impl DetectionProvider for HttpDetector {
    fn detect(&self, text: &str) -> Result<LanguageTag, ProviderError> {
        let reply: Vec<DetectDatum> = self.0.post_json(&json!({"q": text}))?;
        let best = reply
            .into_iter()
            .max_by(|a, b| a.confidence.total_cmp(&b.confidence))
            .ok_or_else(|| ProviderError::Malformed("no detections".into()))?;
        let confidence = if best.confidence > 1.0 { best.confidence / 100.0 } else { best.confidence };
        Ok(LanguageTag::new(best.language.to_lowercase(), confidence.clamp(0.0, 1.0)))
    }
}

#[derive(Deserialize)]
struct RerankReply {
    results: Vec<RerankDatum>,
}

#[derive(Deserialize)]
struct RerankDatum {
    index: usize,
    relevance_score: f64,
}

#[derive(Debug, Clone)]
pub struct HttpReranker(pub HttpClient);

impl RerankProvider for HttpReranker {
    fn rerank_scores(&self, query: &str, texts: &[&str]) -> Result<Vec<f64>, ProviderError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let body = json!({"model": self.0.model(), "query": query, "documents": texts});
        let reply: RerankReply = self.0.post_json(&body)?;
        let mut scores = vec![None; texts.len()];
        for r in reply.results {
            let slot = scores
                .get_mut(r.index)
                .ok_or_else(|| ProviderError::Malformed(format!("result index {} out of range", r.index)))?;
            *slot = Some(r.relevance_score);
        }
        scores
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.ok_or_else(|| ProviderError::Malformed(format!("no score for document {i}"))))
            .collect()
    }
}
