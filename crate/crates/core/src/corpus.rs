//! Archive records and the in-memory corpus store.
//!
//! Every file, whatever its media type, is held through its textual
//! representation. Binary media never enters the system.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::providers::{LlmProvider, ProviderError};

/// Media type of an archive file. The declaration order is the fixed engine
/// order used by routing and reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileType {
    Image,
    Audio,
    Video,
    Document,
}

impl FileType {
    pub const ALL: [FileType; 4] = [FileType::Image, FileType::Audio, FileType::Video, FileType::Document];

    pub fn as_str(self) -> &'static str {
        match self {
            FileType::Image => "image",
            FileType::Audio => "audio",
            FileType::Video => "video",
            FileType::Document => "document",
        }
    }
}

impl fmt::Display for FileType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FileType {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "image" => Ok(FileType::Image),
            "audio" => Ok(FileType::Audio),
            "video" => Ok(FileType::Video),
            "document" => Ok(FileType::Document),
            other => Err(CorpusError::UnknownFileType(other.to_string())),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorpusError {
    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("duplicate file_id {0:?}")]
    DuplicateFileId(String),
    #[error("unknown file_type {0:?}")]
    UnknownFileType(String),
    #[error("invalid file_id {0:?}: must be a non-empty run of decimal digits")]
    InvalidFileId(String),
    #[error("file {file_id} has no topic")]
    MissingTopic { file_id: String },
    #[error("file {file_id} has topic {topic:?} outside the configured topic set")]
    UnknownTopic { file_id: String, topic: String },
    #[error("provider error: {0}")]
    Provider(#[from] ProviderError),
}

/// Key under which enrichment stores the generated description.
pub const GENERATED_DESCRIPTION_KEY: &str = "generated_description";

/// One archive record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchiveFile {
    pub file_id: String,
    pub file_type: FileType,
    pub topic: String,
    pub title: String,
    #[serde(default)]
    pub text_repr: String,
    #[serde(default)]
    pub metadata_physical: BTreeMap<String, String>,
    #[serde(default)]
    pub metadata_custom: BTreeMap<String, String>,
    #[serde(default)]
    pub metadata_ai: BTreeMap<String, String>,
    /// Unknown record keys kept by lax loading, as raw JSON text.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, String>,
}

impl ArchiveFile {
    pub fn new(
        file_id: impl Into<String>,
        file_type: FileType,
        topic: impl Into<String>,
        title: impl Into<String>,
        text_repr: impl Into<String>,
    ) -> Self {
        ArchiveFile {
            file_id: file_id.into(),
            file_type,
            topic: topic.into(),
            title: title.into(),
            text_repr: text_repr.into(),
            metadata_physical: BTreeMap::new(),
            metadata_custom: BTreeMap::new(),
            metadata_ai: BTreeMap::new(),
            extra: BTreeMap::new(),
        }
    }
}

pub fn is_valid_file_id(id: &str) -> bool {
    !id.is_empty() && id.bytes().all(|b| b.is_ascii_digit())
}

/// Immutable-after-load collection of archive files.
///
/// Files are kept in insertion order so that serializing and reloading a
/// store reproduces it exactly, topics included.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStore {
    files: Vec<ArchiveFile>,
    by_id: BTreeMap<String, usize>,
    topics: Vec<String>,
    /// When set, topics are a closed configured set.
    closed_topics: bool,
    per_type_counts: BTreeMap<FileType, usize>,
}

impl CorpusStore {
    /// Store whose topic set grows as files are inserted.
    pub fn new() -> Self {
        Self::default()
    }

    /// Store restricted to a configured topic set.
    pub fn with_topics(topics: Vec<String>) -> Self {
        CorpusStore { topics, closed_topics: true, ..Self::default() }
    }

    pub fn from_files<I>(files: I, topics: Option<Vec<String>>) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = ArchiveFile>,
    {
        let mut store = match topics {
            Some(t) => Self::with_topics(t),
            None => Self::new(),
        };
        for f in files {
            store.insert(f)?;
        }
        Ok(store)
    }

    pub fn insert(&mut self, file: ArchiveFile) -> Result<(), CorpusError> {
        if !is_valid_file_id(&file.file_id) {
            return Err(CorpusError::InvalidFileId(file.file_id));
        }
        if self.by_id.contains_key(&file.file_id) {
            return Err(CorpusError::DuplicateFileId(file.file_id));
        }
        if file.topic.trim().is_empty() {
            return Err(CorpusError::MissingTopic { file_id: file.file_id });
        }
        if !self.topics.contains(&file.topic) {
            if self.closed_topics {
                return Err(CorpusError::UnknownTopic { file_id: file.file_id, topic: file.topic });
            }
            self.topics.push(file.topic.clone());
        }
        *self.per_type_counts.entry(file.file_type).or_insert(0) += 1;
        self.by_id.insert(file.file_id.clone(), self.files.len());
        self.files.push(file);
        Ok(())
    }

    pub fn get(&self, file_id: &str) -> Option<&ArchiveFile> {
        self.by_id.get(file_id).map(|&i| &self.files[i])
    }

    pub fn contains(&self, file_id: &str) -> bool {
        self.by_id.contains_key(file_id)
    }

    pub fn files(&self) -> &[ArchiveFile] {
        &self.files
    }

    pub fn topics(&self) -> &[String] {
        &self.topics
    }

    pub fn per_type_counts(&self) -> &BTreeMap<FileType, usize> {
        &self.per_type_counts
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// Fill every empty `text_repr` through the provider. Stops at the first
    /// provider failure; files enriched before it keep their new text.
    pub fn enrich_missing(&mut self, llm: &dyn LlmProvider) -> Result<usize, CorpusError> {
        let mut enriched = 0;
        for file in self.files.iter_mut() {
            if file.text_repr.trim().is_empty() {
                *file = enrich_text_repr(file, llm)?;
                enriched += 1;
            }
        }
        Ok(enriched)
    }
}

/// Header line that marks a description request for providers.
pub const DESCRIBE_PROMPT_HEADER: &str = "Write a short description of this archive file for search indexing.";

pub fn render_describe_prompt(file: &ArchiveFile) -> String {
    let mut meta = String::new();
    for (k, v) in file.metadata_physical.iter().chain(file.metadata_custom.iter()).chain(file.metadata_ai.iter()) {
        if !meta.is_empty() {
            meta.push_str("; ");
        }
        meta.push_str(&format!("{k}={v}"));
    }
    format!(
        "{DESCRIBE_PROMPT_HEADER}\nfile_type: {}\ntopic: {}\ntitle: {}\nmetadata: {}\nDescription:",
        file.file_type, file.topic, file.title, meta
    )
}

/// Give a file a textual representation if it has none. Files that already
/// have one are returned unchanged without calling the provider.
pub fn enrich_text_repr(file: &ArchiveFile, llm: &dyn LlmProvider) -> Result<ArchiveFile, CorpusError> {
    if !file.text_repr.trim().is_empty() {
        return Ok(file.clone());
    }
    let description = llm.complete(&render_describe_prompt(file))?;
    let description = description.trim();
    if description.is_empty() {
        return Err(ProviderError::Malformed("empty description".to_string()).into());
    }
    let mut out = file.clone();
    out.text_repr = description.to_string();
    out.metadata_ai.insert(GENERATED_DESCRIPTION_KEY.to_string(), description.to_string());
    Ok(out)
}
