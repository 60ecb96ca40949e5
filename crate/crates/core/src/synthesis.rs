//! Response synthesis: one prompt carrying every retrieved chunk, one LLM
//! call, and extraction of the file IDs the answer mentions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CorpusStore, FileType};
use crate::providers::LlmProvider;

pub const NO_RESULTS_TEXT: &str = "No matching files found.";
pub const SYNTHESIS_FAILED_TEXT: &str = "The answer could not be generated.";

pub const DEFAULT_TEMPLATE: &str = "You are the search assistant of a digital archive. \
Answer the query using only the retrieved chunks below.
{format_instructions}

Query: {query}

Retrieved chunks:
{chunks}
Answer:";

const SLOTS: [&str; 3] = ["{query}", "{chunks}", "{format_instructions}"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthesisError {
    #[error("template must contain {slot} exactly once, found {count}")]
    TemplateSlot { slot: &'static str, count: usize },
}

/// Pipeline stages that fell back to a degraded behaviour for a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degradation {
    DetectionFallback,
    TranslationFailed,
    SelectorFallback,
    MissingIndex,
    RerankFailed,
    SynthesisFailed,
    BacktranslationFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisPrompt {
    template: String,
}

impl Default for SynthesisPrompt {
    fn default() -> Self {
        SynthesisPrompt { template: DEFAULT_TEMPLATE.to_string() }
    }
}

/// One chunk as it appears in the prompt.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptChunk<'a> {
    pub file_id: &'a str,
    pub file_type: FileType,
    pub title: &'a str,
    pub text: &'a str,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkHeader {
    pub file_id: String,
    pub file_type: String,
    pub title: String,
}

pub fn render_chunk_header(ordinal: usize, c: &PromptChunk<'_>) -> String {
    format!("[chunk {ordinal}] file_id: {} | file_type: {} | title: {}", c.file_id, c.file_type, c.title)
}

pub fn parse_chunk_header(line: &str) -> Option<ChunkHeader> {
    let rest = line.strip_prefix("[chunk ")?;
    let (ordinal, rest) = rest.split_once("] file_id: ")?;
    if ordinal.is_empty() || !ordinal.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let (file_id, rest) = rest.split_once(" | file_type: ")?;
    let (file_type, title) = rest.split_once(" | title: ")?;
    Some(ChunkHeader { file_id: file_id.to_string(), file_type: file_type.to_string(), title: title.to_string() })
}

fn type_instruction(ft: FileType) -> &'static str {
    match ft {
        FileType::Image => "For image files, say what the picture shows.",
        FileType::Audio => "For audio files, say what can be heard in the recording.",
        FileType::Video => "For video files, say what the footage shows.",
        FileType::Document => "For document files, say what the text covers.",
    }
}

/// Citation rules plus one line per file type present among the chunks.
pub fn format_instructions(types: &BTreeSet<FileType>) -> String {
    let mut s = String::from(
        "Recommend each relevant file on its own line and cite it as [file_id: <id>] using the file_id shown with the chunk. \
         If nothing is relevant, say that no matching files were found.",
    );
    for &ft in types {
        s.push('\n');
        s.push_str(type_instruction(ft));
    }
    s
}

impl SynthesisPrompt {
    pub fn new(template: impl Into<String>) -> Result<Self, SynthesisError> {
        let template = template.into();
        for slot in SLOTS {
            let count = template.matches(slot).count();
            if count != 1 {
                return Err(SynthesisError::TemplateSlot { slot, count });
            }
        }
        Ok(SynthesisPrompt { template })
    }

    pub fn template(&self) -> &str {
        &self.template
    }

    /// Chunks are rendered in the given order, numbered from 1.
    pub fn render(&self, query: &str, chunks: &[PromptChunk<'_>]) -> String {
        let mut body = String::new();
        for (i, c) in chunks.iter().enumerate() {
            body.push_str(&render_chunk_header(i + 1, c));
            body.push('\n');
            body.push_str(c.text);
            body.push('\n');
        }
        let types: BTreeSet<FileType> = chunks.iter().map(|c| c.file_type).collect();
        // fill the slots in one pass so slot text inside the values is inert
        let mut out = String::with_capacity(self.template.len() + body.len());
        let mut rest = self.template.as_str();
        while let Some((pos, slot)) = SLOTS.iter().filter_map(|s| rest.find(s).map(|p| (p, *s))).min_by_key(|(p, _)| *p)
        {
            out.push_str(&rest[..pos]);
            match slot {
                "{query}" => out.push_str(query),
                "{chunks}" => out.push_str(&body),
                _ => out.push_str(&format_instructions(&types)),
            }
            rest = &rest[pos + slot.len()..];
        }
        out.push_str(rest);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesizedResponse {
    pub text: String,
    pub cited_file_ids: Vec<String>,
    pub degradation_flags: BTreeSet<Degradation>,
    /// Stage name to milliseconds.
    pub timings: BTreeMap<String, f64>,
}

impl SynthesizedResponse {
    fn new(text: String, corpus: &CorpusStore) -> Self {
        let cited_file_ids = extract_file_ids(&text, corpus);
        SynthesizedResponse { text, cited_file_ids, degradation_flags: BTreeSet::new(), timings: BTreeMap::new() }
    }

    /// Replace the text and re-extract citations from it.
    pub fn set_text(&mut self, text: String, corpus: &CorpusStore) {
        self.cited_file_ids = extract_file_ids(&text, corpus);
        self.text = text;
    }
}

pub fn synthesize(
    query_en: &str,
    chunks: &[PromptChunk<'_>],
    llm: &dyn LlmProvider,
    prompt: &SynthesisPrompt,
    corpus: &CorpusStore,
) -> SynthesizedResponse {
    if chunks.is_empty() {
        return SynthesizedResponse::new(NO_RESULTS_TEXT.to_string(), corpus);
    }
    match llm.complete(&prompt.render(query_en, chunks)) {
        Ok(text) => SynthesizedResponse::new(text.trim().to_string(), corpus),
        Err(_) => {
            let mut r = SynthesizedResponse::new(SYNTHESIS_FAILED_TEXT.to_string(), corpus);
            r.cited_file_ids.clear();
            r.degradation_flags.insert(Degradation::SynthesisFailed);
            r
        }
    }
}

/// Every `[file_id: <digits>]` marker (inner spaces optional) with its byte
/// range and the id it carries.
pub fn find_citation_markers(text: &str) -> Vec<(Range<usize>, String)> {
    const OPEN: &str = "[file_id:";
    let mut out = Vec::new();
    let mut from = 0;
    while let Some(p) = text[from..].find(OPEN) {
        let start = from + p;
        let after = &text[start + OPEN.len()..];
        let trimmed = after.trim_start_matches(' ');
        let digits = trimmed.bytes().take_while(u8::is_ascii_digit).count();
        let tail = trimmed[digits..].trim_start_matches(' ');
        if digits > 0 && tail.starts_with(']') {
            let end = text.len() - tail.len() + 1;
            out.push((start..end, trimmed[..digits].to_string()));
            from = end;
        } else {
            from = start + OPEN.len();
        }
    }
    out
}

/// IDs cited by a response: marker IDs first, then bare maximal digit runs,
/// keeping only corpus IDs, de-duplicated in first-occurrence order.
pub fn extract_file_ids(text: &str, corpus: &CorpusStore) -> Vec<String> {
    let markers = find_citation_markers(text).into_iter().map(|(_, id)| id);
    let bytes = text.as_bytes();
    let mut runs = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            runs.push(text[start..i].to_string());
        } else {
            i += 1;
        }
    }
    let mut seen = BTreeSet::new();
    markers.chain(runs).filter(|id| corpus.contains(id) && seen.insert(id.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ArchiveFile;
    use crate::providers::mock::{LlmMode, MockLlm};
    use alloc::vec;

    fn corpus(ids: &[&str]) -> CorpusStore {
        CorpusStore::from_files(
            ids.iter().map(|id| ArchiveFile::new(*id, FileType::Image, "wildlife", "Golden lions", "lions")),
            None,
        )
        .unwrap()
    }

    fn chunk(id: &'static str, ft: FileType) -> PromptChunk<'static> {
        PromptChunk { file_id: id, file_type: ft, title: "Golden lions", text: "golden lions at dusk" }
    }

    #[test]
    fn figure_five_ids() {
        let c = corpus(&["5138120512", "1466458735"]);
        let text = "…photo [file_id: 5138120512] and clip [file_id: 1466458735]";
        assert_eq!(extract_file_ids(text, &c), vec!["5138120512", "1466458735"]);
        assert!(extract_file_ids("no matching files found", &c).is_empty());
    }

    #[test]
    fn bare_digits_filtered_and_deduplicated() {
        let c = corpus(&["5138120512"]);
        let text = "call 555 about file 5138120512, again 5138120512";
        assert_eq!(extract_file_ids(text, &c), vec!["5138120512"]);
    }

    #[test]
    fn markers_take_precedence_over_bare_order() {
        let c = corpus(&["11", "22"]);
        assert_eq!(extract_file_ids("see 22 then [file_id: 11]", &c), vec!["11", "22"]);
        assert_eq!(extract_file_ids("x [file_id:22 ] y", &c), vec!["22"]);
        assert_eq!(extract_file_ids("123", &c), Vec::<String>::new());
    }

    #[test]
    fn marker_scan() {
        let m = find_citation_markers("a [file_id: 7] [file_id: x] [file_id:8]");
        assert_eq!(m, vec![(2..14, "7".to_string()), (28..39, "8".to_string())]);
    }

    #[test]
    fn template_slots_validated() {
        assert!(SynthesisPrompt::new("{query} {chunks} {format_instructions}").is_ok());
        assert_eq!(
            SynthesisPrompt::new("{query} {chunks}"),
            Err(SynthesisError::TemplateSlot { slot: "{format_instructions}", count: 0 })
        );
        assert_eq!(
            SynthesisPrompt::new("{query} {query} {chunks} {format_instructions}"),
            Err(SynthesisError::TemplateSlot { slot: "{query}", count: 2 })
        );
        SynthesisPrompt::new(DEFAULT_TEMPLATE).unwrap();
    }

    #[test]
    fn prompt_names_each_filetype_present() {
        let p = SynthesisPrompt::default();
        let rendered = p.render("q {chunks}", &[chunk("1", FileType::Video), chunk("2", FileType::Audio)]);
        assert!(rendered.contains(type_instruction(FileType::Video)));
        assert!(rendered.contains(type_instruction(FileType::Audio)));
        assert!(!rendered.contains(type_instruction(FileType::Image)));
        assert!(rendered.contains("Query: q {chunks}\n"));
        let headers: Vec<_> = rendered.lines().filter_map(parse_chunk_header).collect();
        assert_eq!(headers.len(), 2);
        assert_eq!(headers[0].file_id, "1");
        assert_eq!(headers[1].file_type, "audio");
    }

    #[test]
    fn synthesize_with_mocks() {
        let c = corpus(&["1466458735", "5138120512", "3", "4"]);
        let p = SynthesisPrompt::default();
        let two = [chunk("1466458735", FileType::Image), chunk("5138120512", FileType::Video)];
        let r = synthesize("q", &two, &MockLlm::new(LlmMode::CitingOracle), &p, &c);
        assert_eq!(r.cited_file_ids, vec!["1466458735", "5138120512"]);

        let four = [
            chunk("1466458735", FileType::Image),
            chunk("5138120512", FileType::Image),
            chunk("3", FileType::Image),
            chunk("4", FileType::Image),
        ];
        let r = synthesize("q", &four, &MockLlm::new(LlmMode::DropHalf), &p, &c);
        assert_eq!(r.cited_file_ids, vec!["1466458735", "3"]);

        let r = synthesize("q", &[], &MockLlm::new(LlmMode::Fail), &p, &c);
        assert_eq!((r.text.as_str(), r.cited_file_ids.len()), (NO_RESULTS_TEXT, 0));

        let r = synthesize("q", &two, &MockLlm::new(LlmMode::Fail), &p, &c);
        assert!(r.cited_file_ids.is_empty());
        assert!(r.degradation_flags.contains(&Degradation::SynthesisFailed));
    }
}
