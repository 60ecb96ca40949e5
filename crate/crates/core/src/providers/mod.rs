//! Interfaces to every external intelligence the pipeline uses, plus their
//! configuration. HTTP implementations live in the `smartsearch` crate;
//! deterministic mocks live in [`mock`].

pub mod lexicon;
pub mod mock;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::indexing::EmbeddingVector;
use crate::language::LanguageTag;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProviderError {
    #[error("timed out")]
    Timeout,
    #[error("status {code}: {body}")]
    Status { code: u16, body: String },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("transport: {0}")]
    Transport(String),
    #[error("empty input")]
    EmptyInput,
    #[error("provider failure: {0}")]
    Failed(String),
}

pub trait LlmProvider: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, ProviderError>;
}

pub trait EmbeddingProvider: Send + Sync {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, ProviderError>;
    fn dims(&self) -> usize;
}

pub trait DetectionProvider: Send + Sync {
    fn detect(&self, text: &str) -> Result<LanguageTag, ProviderError>;
}

pub trait TranslationProvider: Send + Sync {
    /// Translate between ISO-639-1 codes.
    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String, ProviderError>;
}

pub trait RerankProvider: Send + Sync {
    /// One relevance score per text, in input order.
    fn rerank_scores(&self, query: &str, texts: &[&str]) -> Result<Vec<f64>, ProviderError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Llm,
    Embedding,
    Translation,
    Detection,
    Rerank,
}

impl ProviderKind {
    pub const ALL: [ProviderKind; 5] = [
        ProviderKind::Llm,
        ProviderKind::Embedding,
        ProviderKind::Translation,
        ProviderKind::Detection,
        ProviderKind::Rerank,
    ];

    /// Upper-case name used in `SMARTSEARCH_<KIND>_*` environment variables.
    pub fn env_name(self) -> &'static str {
        match self {
            ProviderKind::Llm => "LLM",
            ProviderKind::Embedding => "EMBEDDING",
            ProviderKind::Translation => "TRANSLATION",
            ProviderKind::Detection => "DETECTION",
            ProviderKind::Rerank => "RERANK",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Http,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub backend: Backend,
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default)]
    pub auth_env_var: Option<String>,
    #[serde(default)]
    pub model_id: Option<String>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
}

fn default_timeout_ms() -> u64 {
    30_000
}

fn default_retries() -> u32 {
    2
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("{0}: http backend requires an endpoint")]
    MissingEndpoint(&'static str),
    #[error("{0}: timeout must be positive")]
    ZeroTimeout(&'static str),
    #[error("mock embed_dims must be at least 8, got {0}")]
    EmbedDimsTooSmall(usize),
}

impl ProviderConfig {
    pub fn mock(kind: ProviderKind) -> Self {
        ProviderConfig {
            kind,
            backend: Backend::Mock,
            endpoint: None,
            auth_env_var: None,
            model_id: None,
            timeout_ms: default_timeout_ms(),
            max_retries: default_retries(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let name = self.kind.env_name();
        if self.backend == Backend::Http && self.endpoint.as_deref().is_none_or(str::is_empty) {
            return Err(ConfigError::MissingEndpoint(name));
        }
        if self.timeout_ms == 0 {
            return Err(ConfigError::ZeroTimeout(name));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LlmMode {
    /// Cites every distinct file of the prompt, in prompt order.
    CitingOracle,
    /// Returns the prompt.
    Echo,
    /// Cites only the files at odd ranks (1st, 3rd, ...).
    DropHalf,
    /// Every call fails.
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MockBehavior {
    pub llm_mode: LlmMode,
    pub embed_dims: usize,
    pub seed: u64,
    /// Fold the Korean side of the closed lexicon onto English before hashing,
    /// so the mock embedder is cross-lingual on that vocabulary.
    pub cross_lingual: bool,
}

impl Default for MockBehavior {
    fn default() -> Self {
        MockBehavior { llm_mode: LlmMode::CitingOracle, embed_dims: 256, seed: 0, cross_lingual: true }
    }
}

impl MockBehavior {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.embed_dims < 8 {
            return Err(ConfigError::EmbedDimsTooSmall(self.embed_dims));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn http_needs_endpoint() {
        let mut c = ProviderConfig::mock(ProviderKind::Llm);
        c.validate().unwrap();
        c.backend = Backend::Http;
        assert_eq!(c.validate(), Err(ConfigError::MissingEndpoint("LLM")));
        c.endpoint = Some("http://localhost:8080/v1/chat/completions".into());
        c.validate().unwrap();
        c.timeout_ms = 0;
        assert_eq!(c.validate(), Err(ConfigError::ZeroTimeout("LLM")));
    }

    #[test]
    fn embed_dims_floor() {
        let mut b = MockBehavior::default();
        b.validate().unwrap();
        b.embed_dims = 4;
        assert!(b.validate().is_err());
    }
}
