//! Deterministic stand-ins for every provider. Each mock is a pure function
//! of its inputs and its seed.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::hash::Hasher;

use fnv::FnvHasher;

use super::lexicon;
use super::{
    DetectionProvider, EmbeddingProvider, LlmProvider, MockBehavior, ProviderError, RerankProvider, TranslationProvider,
};
use crate::corpus::DESCRIBE_PROMPT_HEADER;
use crate::indexing::{tokenize, tokenize_spans, EmbeddingVector};
use crate::language::LanguageTag;
use crate::routing::{SELECTOR_ENGINES_HEADER, SELECTOR_QUERY_PREFIX};
use crate::synthesis::{parse_chunk_header, NO_RESULTS_TEXT};

pub use super::LlmMode;

#[derive(Debug, Clone, Copy)]
pub struct MockLlm {
    pub mode: LlmMode,
}

impl MockLlm {
    pub fn new(mode: LlmMode) -> Self {
        MockLlm { mode }
    }

    fn describe(prompt: &str) -> String {
        let field =
            |name: &str| prompt.lines().find_map(|l| l.strip_prefix(name)).map(str::trim).unwrap_or("").to_string();
        format!("{}, an archive item on the topic of {}.", field("title:"), field("topic:"))
    }

    /// Pick the listed engines whose name (or plural) occurs in the query;
    /// all listed engines when none does.
    fn select(prompt: &str) -> String {
        let mut engines: Vec<&str> = Vec::new();
        let mut in_list = false;
        let mut query = "";
        for line in prompt.lines() {
            if line.trim() == SELECTOR_ENGINES_HEADER {
                in_list = true;
                continue;
            }
            if let Some(q) = line.strip_prefix(SELECTOR_QUERY_PREFIX) {
                query = q;
            }
            if in_list {
                match line.strip_prefix("- ").and_then(|l| l.split(':').next()) {
                    Some(name) => engines.push(name.trim()),
                    None => in_list = false,
                }
            }
        }
        let terms = tokenize(query);
        let mut picked: Vec<&str> = engines
            .iter()
            .copied()
            .filter(|e| {
                let plural = format!("{e}s");
                terms.iter().any(|t| t == e || *t == plural)
            })
            .collect();
        if picked.is_empty() {
            picked = engines;
        }
        let quoted: Vec<String> = picked.iter().map(|e| format!("\"{e}\"")).collect();
        format!("[{}]", quoted.join(", "))
    }

    fn cite(prompt: &str, every_other: bool) -> String {
        let mut files: Vec<(String, String)> = Vec::new();
        for line in prompt.lines() {
            if let Some(h) = parse_chunk_header(line) {
                if !files.iter().any(|(id, _)| *id == h.file_id) {
                    files.push((h.file_id, h.title));
                }
            }
        }
        let lines: Vec<String> = files
            .iter()
            .enumerate()
            .filter(|(rank, _)| !every_other || rank % 2 == 0)
            .map(|(_, (id, title))| format!("Recommended: {title} [file_id: {id}]."))
            .collect();
        if lines.is_empty() {
            NO_RESULTS_TEXT.to_string()
        } else {
            lines.join("\n")
        }
    }
}

impl LlmProvider for MockLlm {
    fn complete(&self, prompt: &str) -> Result<String, ProviderError> {
        match self.mode {
            LlmMode::Fail => Err(ProviderError::Failed("injected mock failure".into())),
            LlmMode::Echo => Ok(prompt.to_string()),
            LlmMode::CitingOracle | LlmMode::DropHalf => {
                if prompt.starts_with(DESCRIBE_PROMPT_HEADER) {
                    Ok(Self::describe(prompt))
                } else if prompt.lines().any(|l| l.trim() == SELECTOR_ENGINES_HEADER) {
                    Ok(Self::select(prompt))
                } else {
                    Ok(Self::cite(prompt, self.mode == LlmMode::DropHalf))
                }
            }
        }
    }
}

/// Seeded hashed bag of words: every term is hashed (FNV-1a keyed by the
/// seed) into one of `dims` buckets, bucket counts are accumulated and the
/// vector is L2-normalized.
#[derive(Debug, Clone, Copy)]
pub struct MockEmbedder {
    pub dims: usize,
    pub seed: u64,
    pub cross_lingual: bool,
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;

impl Default for MockEmbedder {
    fn default() -> Self {
        MockEmbedder::from_behavior(&MockBehavior::default())
    }
}

impl MockEmbedder {
    pub fn from_behavior(b: &MockBehavior) -> Self {
        MockEmbedder { dims: b.embed_dims, seed: b.seed, cross_lingual: b.cross_lingual }
    }

    pub fn bucket(&self, term: &str) -> usize {
        let mut h = FnvHasher::with_key(FNV_OFFSET ^ self.seed);
        h.write(term.as_bytes());
        (h.finish() % self.dims as u64) as usize
    }
}

impl EmbeddingProvider for MockEmbedder {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, ProviderError> {
        let terms = tokenize(text);
        if terms.is_empty() {
            return Err(ProviderError::EmptyInput);
        }
        let mut v = vec![0.0f64; self.dims];
        for t in &terms {
            let t = match (self.cross_lingual, lexicon::ko_to_en(t)) {
                (true, Some(en)) => en,
                _ => t.as_str(),
            };
            v[self.bucket(t)] += 1.0;
        }
        let norm = libm::sqrt(v.iter().map(|x| x * x).sum());
        for x in v.iter_mut() {
            *x /= norm;
        }
        Ok(EmbeddingVector(v))
    }

    fn dims(&self) -> usize {
        self.dims
    }
}

const ENGLISH_PROFILE: &[&str] = &[
    "a",
    "about",
    "all",
    "an",
    "and",
    "any",
    "are",
    "files",
    "file",
    "find",
    "for",
    "from",
    "give",
    "in",
    "is",
    "me",
    "of",
    "on",
    "or",
    "please",
    "recommend",
    "retrieve",
    "show",
    "some",
    "the",
    "to",
    "what",
    "with",
];

/// Script and stopword classifier over {en, ko}. Hangul-majority text is
/// Korean with confidence equal to its Hangul share of letters; otherwise
/// English with confidence latin_share · (0.8 + 0.2 · profile_share).
#[derive(Debug, Clone, Copy, Default)]
pub struct MockDetector;

fn is_hangul(c: char) -> bool {
    matches!(c, '\u{AC00}'..='\u{D7A3}' | '\u{1100}'..='\u{11FF}' | '\u{3130}'..='\u{318F}')
}

impl DetectionProvider for MockDetector {
    fn detect(&self, text: &str) -> Result<LanguageTag, ProviderError> {
        if text.trim().is_empty() {
            return Err(ProviderError::EmptyInput);
        }
        let letters = text.chars().filter(|c| c.is_alphabetic()).count();
        if letters == 0 {
            return Ok(LanguageTag::new("en", 0.0));
        }
        let hangul = text.chars().filter(|&c| is_hangul(c)).count();
        let hangul_share = hangul as f64 / letters as f64;
        if hangul_share >= 0.5 {
            return Ok(LanguageTag::new("ko", hangul_share));
        }
        let latin = text.chars().filter(|c| c.is_ascii_alphabetic()).count();
        let words = tokenize(text);
        let in_profile = words.iter().filter(|w| ENGLISH_PROFILE.contains(&w.as_str())).count();
        let profile_share = if words.is_empty() { 0.0 } else { in_profile as f64 / words.len() as f64 };
        let conf = latin as f64 / letters as f64 * (0.8 + 0.2 * profile_share);
        Ok(LanguageTag::new("en", conf))
    }
}

/// Word-by-word dictionary translation between English and Korean over the
/// closed lexicon. Unknown words pass through; a word starting a sentence in
/// English output is capitalized.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockTranslator;

impl TranslationProvider for MockTranslator {
    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String, ProviderError> {
        if source == target {
            return Ok(text.to_string());
        }
        let lookup: fn(&str) -> Option<&'static str> = match (source, target) {
            ("en", "ko") => lexicon::en_to_ko,
            ("ko", "en") => lexicon::ko_to_en,
            _ => return Err(ProviderError::Failed(format!("mock translator has no {source}->{target} dictionary"))),
        };
        let mut out = String::with_capacity(text.len());
        let mut last = 0;
        for (span, term) in tokenize_spans(text) {
            out.push_str(&text[last..span.start]);
            match lookup(&term) {
                Some(word) if target == "en" && sentence_start(&out) => out.push_str(&capitalize(word)),
                Some(word) => out.push_str(word),
                None => out.push_str(&text[span.clone()]),
            }
            last = span.end;
        }
        out.push_str(&text[last..]);
        Ok(out)
    }
}

fn sentence_start(prefix: &str) -> bool {
    match prefix.trim_end_matches([' ', '\t']).chars().last() {
        None => true,
        Some(c) => matches!(c, '.' | '!' | '?' | '\n'),
    }
}

fn capitalize(word: &str) -> String {
    let mut cs = word.chars();
    match cs.next() {
        Some(first) => first.to_uppercase().chain(cs).collect(),
        None => String::new(),
    }
}

/// Normalized query-term overlap: |Q ∩ T| / |Q| over distinct terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockReranker;

pub fn term_overlap(query: &str, text: &str) -> f64 {
    let mut q = tokenize(query);
    q.sort();
    q.dedup();
    if q.is_empty() {
        return 0.0;
    }
    let t = tokenize(text);
    let shared = q.iter().filter(|w| t.contains(w)).count();
    shared as f64 / q.len() as f64
}

impl RerankProvider for MockReranker {
    fn rerank_scores(&self, query: &str, texts: &[&str]) -> Result<Vec<f64>, ProviderError> {
        Ok(texts.iter().map(|t| term_overlap(query, t)).collect())
    }
}

/// Provider whose every call fails, for error-policy tests.
#[derive(Debug, Clone)]
pub struct FailingProvider(pub ProviderError);

impl Default for FailingProvider {
    fn default() -> Self {
        FailingProvider(ProviderError::Timeout)
    }
}

impl LlmProvider for FailingProvider {
    fn complete(&self, _: &str) -> Result<String, ProviderError> {
        Err(self.0.clone())
    }
}

impl EmbeddingProvider for FailingProvider {
    fn embed(&self, _: &str) -> Result<EmbeddingVector, ProviderError> {
        Err(self.0.clone())
    }
    fn dims(&self) -> usize {
        8
    }
}

impl DetectionProvider for FailingProvider {
    fn detect(&self, _: &str) -> Result<LanguageTag, ProviderError> {
        Err(self.0.clone())
    }
}

impl TranslationProvider for FailingProvider {
    fn translate(&self, _: &str, _: &str, _: &str) -> Result<String, ProviderError> {
        Err(self.0.clone())
    }
}

impl RerankProvider for FailingProvider {
    fn rerank_scores(&self, _: &str, _: &[&str]) -> Result<Vec<f64>, ProviderError> {
        Err(self.0.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexing::cosine_similarity;

    const SYNTH_PROMPT: &str = "Query: x\n[chunk 1] file_id: 11 | file_type: image | title: Golden lions\nlions\n\
        [chunk 2] file_id: 22 | file_type: audio | title: Quiet birds\nbirds\n\
        [chunk 3] file_id: 11 | file_type: image | title: Golden lions\nmore\n\
        [chunk 4] file_id: 33 | file_type: video | title: Rare whales\nw\n\
        [chunk 5] file_id: 44 | file_type: document | title: Modern robots\nr\n";

    #[test]
    fn citing_oracle_cites_distinct_files_in_order() {
        let out = MockLlm::new(LlmMode::CitingOracle).complete(SYNTH_PROMPT).unwrap();
        assert_eq!(
            out,
            "Recommended: Golden lions [file_id: 11].\nRecommended: Quiet birds [file_id: 22].\n\
             Recommended: Rare whales [file_id: 33].\nRecommended: Modern robots [file_id: 44]."
        );
    }

    #[test]
    fn drop_half_cites_ranks_one_and_three() {
        let out = MockLlm::new(LlmMode::DropHalf).complete(SYNTH_PROMPT).unwrap();
        assert_eq!(out, "Recommended: Golden lions [file_id: 11].\nRecommended: Rare whales [file_id: 33].");
    }

    #[test]
    fn echo_and_fail() {
        assert_eq!(MockLlm::new(LlmMode::Echo).complete("abc").unwrap(), "abc");
        assert!(MockLlm::new(LlmMode::Fail).complete("abc").is_err());
    }

    #[test]
    fn embedder_is_deterministic_and_tf_scaled() {
        let e = MockEmbedder::default();
        assert_eq!(e.embed("wildlife photo").unwrap(), e.embed("wildlife photo").unwrap());
        let a = e.embed("cat cat").unwrap();
        let b = e.embed("cat").unwrap();
        // both are the unit vector on bucket("cat"): counts 2 and 1 normalize to 1.0
        assert_eq!(a, b);
        assert_eq!(a.0[e.bucket("cat")], 1.0);
        assert!((cosine_similarity(&a, &b) - 1.0).abs() < 1e-12);
        assert_eq!(a.dims(), 256);
        assert_eq!(e.embed(""), Err(ProviderError::EmptyInput));
    }

    #[test]
    fn embedder_seed_changes_buckets() {
        let a = MockEmbedder { seed: 1, ..Default::default() };
        let b = MockEmbedder { seed: 2, ..Default::default() };
        let words = ["lions", "reefs", "robots", "tennis", "spices", "towers"];
        assert!(words.iter().any(|w| a.bucket(w) != b.bucket(w)));
    }

    #[test]
    fn cross_lingual_folding() {
        let e = MockEmbedder::default();
        assert_eq!(e.embed("야생동물 사자들").unwrap(), e.embed("wildlife lions").unwrap());
        let plain = MockEmbedder { cross_lingual: false, ..Default::default() };
        assert_ne!(plain.embed("야생동물").unwrap(), plain.embed("wildlife").unwrap());
    }

    #[test]
    fn detector_profiles() {
        let en = MockDetector.detect("Recommend some image files about wildlife").unwrap();
        assert_eq!(en.code, "en");
        // all letters latin; recommend, some, files, about are profile words (4 of 6)
        assert!((en.confidence - (0.8 + 0.2 * 4.0 / 6.0)).abs() < 1e-12);
        let ko = MockDetector.detect("이미지 파일을 추천해줘").unwrap();
        assert_eq!((ko.code.as_str(), ko.confidence), ("ko", 1.0));
        let give = MockDetector.detect("Give me some files about wildlife").unwrap();
        assert_eq!(give.code, "en");
        assert!(give.confidence >= 0.9);
        assert!(MockDetector.detect("  ").is_err());
    }

    #[test]
    fn translator_round_trips_templates() {
        let en = "Retrieve some image or audio files about political events";
        let ko = MockTranslator.translate(en, "en", "ko").unwrap();
        assert_eq!(ko, "검색해 몇몇 이미지 또는 오디오 파일들 관련 정치 행사");
        assert_eq!(MockTranslator.translate(&ko, "ko", "en").unwrap(), en);
        assert_eq!(MockTranslator.translate(en, "en", "en").unwrap(), en);
        assert!(MockTranslator.translate(en, "en", "fr").is_err());
    }

    #[test]
    fn translator_keeps_unknown_words_and_punctuation() {
        let out = MockTranslator.translate("Recommended: Golden lions ⟦0⟧.", "en", "ko").unwrap();
        assert_eq!(out, "추천됨: 황금빛 사자들 ⟦0⟧.");
    }

    #[test]
    fn reranker_overlap() {
        let s =
            MockReranker.rerank_scores("wildlife photo", &["wildlife photo of lions", "annual budget report"]).unwrap();
        assert_eq!(s, vec![1.0, 0.0]);
        assert_eq!(term_overlap("", "x"), 0.0);
        assert_eq!(term_overlap("a b b c", "b c d"), 2.0 / 3.0);
    }

    #[test]
    fn selector_mock() {
        let prompt = crate::routing::render_selector_prompt("Retrieve some audio or video files about celebrities");
        assert_eq!(MockLlm::new(LlmMode::CitingOracle).complete(&prompt).unwrap(), "[\"audio\", \"video\"]");
        let prompt = crate::routing::render_selector_prompt("Give me some files about landscapes");
        assert_eq!(
            MockLlm::new(LlmMode::CitingOracle).complete(&prompt).unwrap(),
            "[\"image\", \"audio\", \"video\", \"document\"]"
        );
    }
}
