//! Synthetic benchmark: a seeded corpus with one cell per (filetype, topic)
//! and the three query templates instantiated over it.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::corpus::{ArchiveFile, CorpusStore, FileType};
use crate::indexing::tokenize;
use crate::providers::lexicon::{subjects_for, ADJECTIVES};
use crate::providers::mock::MockTranslator;
use crate::providers::TranslationProvider;

pub const DEFAULT_TOPICS: [&str; 10] = [
    "wildlife",
    "landscapes",
    "celebrities",
    "political events",
    "sports",
    "architecture",
    "cuisine",
    "technology",
    "festivals",
    "oceans",
];

/// The 40/60/10 benchmark size depends on exactly ten topics.
pub const STRICT_TOPIC_COUNT: usize = 10;

const FALLBACK_SUBJECTS: [&str; 3] = ["items", "objects", "records"];

fn type_noun(ft: FileType) -> &'static str {
    match ft {
        FileType::Image => "photograph",
        FileType::Audio => "recording",
        FileType::Video => "footage",
        FileType::Document => "report",
    }
}

fn physical_format(ft: FileType) -> &'static str {
    match ft {
        FileType::Image => "jpeg",
        FileType::Audio => "mp3",
        FileType::Video => "mp4",
        FileType::Document => "pdf",
    }
}

fn capitalize(word: &str) -> String {
    let mut cs = word.chars();
    match cs.next() {
        Some(c) => c.to_uppercase().chain(cs).collect(),
        None => String::new(),
    }
}

/// `per_cell` files for every (filetype, topic) cell, filetype-major. IDs
/// are distinct 10-digit strings; titles and text carry no digits, so the
/// only digit runs an answer can contain are file IDs.
pub fn generate_corpus(topics: &[String], per_cell: usize, seed: u64) -> CorpusStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = CorpusStore::with_topics(topics.to_vec());
    let mut used = BTreeSet::new();
    for ft in FileType::ALL {
        for topic in topics {
            let subjects: Vec<&str> = match subjects_for(topic) {
                Some(s) => s.iter().map(|(en, _)| *en).collect(),
                None => FALLBACK_SUBJECTS.to_vec(),
            };
            for _ in 0..per_cell {
                let id = loop {
                    let id = rng.random_range(1_000_000_000u64..10_000_000_000).to_string();
                    if used.insert(id.clone()) {
                        break id;
                    }
                };
                let adj = ADJECTIVES[rng.random_range(0..ADJECTIVES.len())].0;
                let first = rng.random_range(0..subjects.len());
                let second = (first + rng.random_range(1..subjects.len())) % subjects.len();
                let (s1, s2) = (subjects[first], subjects[second]);
                let noun = type_noun(ft);
                let text = match rng.random_range(0..3u32) {
                    0 => format!("This {noun} presents {adj} {s1} and {s2} from the {topic} collection."),
                    1 => format!("{} {s1} with {s2}, catalogued under {topic} as an archival {noun}.", capitalize(adj)),
                    _ => format!("Archival {noun} showing {adj} {s1} beside {s2}; subject area: {topic}."),
                };
                let mut file = ArchiveFile::new(id, ft, topic.clone(), format!("{} {s1}", capitalize(adj)), text);
                let size = rng.random_range(10_000u64..50_000_000);
                let (month, day) = (rng.random_range(1..13u32), rng.random_range(1..29u32));
                file.metadata_physical.insert("format".into(), physical_format(ft).into());
                file.metadata_physical.insert("size_bytes".into(), size.to_string());
                file.metadata_physical.insert("created".into(), format!("2023-{month:02}-{day:02}"));
                store.insert(file).expect("generated records are valid and unique");
            }
        }
    }
    store
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryType {
    OneFiletype,
    TwoFiletypes,
    AllFiletypes,
}

impl QueryType {
    pub const ALL: [QueryType; 3] = [QueryType::OneFiletype, QueryType::TwoFiletypes, QueryType::AllFiletypes];

    pub fn as_str(self) -> &'static str {
        match self {
            QueryType::OneFiletype => "one_filetype",
            QueryType::TwoFiletypes => "two_filetypes",
            QueryType::AllFiletypes => "all_filetypes",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalQuery {
    pub query_id: String,
    pub text_en: String,
    pub text_ko: Option<String>,
    pub query_type: QueryType,
    pub target_types: BTreeSet<FileType>,
    pub topic: String,
}

/// Type 1 (filetype-major), then type 2 over the six unordered filetype
/// pairs, then type 3; ids q001, q002, ... in that order.
pub fn generate_queries(topics: &[String], strict: bool) -> Result<Vec<EvalQuery>, EvalError> {
    if strict && topics.len() != STRICT_TOPIC_COUNT {
        return Err(EvalError::TopicCountMismatch { expected: STRICT_TOPIC_COUNT, got: topics.len() });
    }
    let mut specs: Vec<(String, QueryType, BTreeSet<FileType>, &String)> = Vec::new();
    for ft in FileType::ALL {
        for topic in topics {
            specs.push((
                format!("Recommend some {ft} files about {topic}"),
                QueryType::OneFiletype,
                [ft].into_iter().collect(),
                topic,
            ));
        }
    }
    for (i, a) in FileType::ALL.iter().enumerate() {
        for b in &FileType::ALL[i + 1..] {
            for topic in topics {
                specs.push((
                    format!("Retrieve some {a} or {b} files about {topic}"),
                    QueryType::TwoFiletypes,
                    [*a, *b].into_iter().collect(),
                    topic,
                ));
            }
        }
    }
    for topic in topics {
        specs.push((
            format!("Give me some files about {topic}"),
            QueryType::AllFiletypes,
            FileType::ALL.into_iter().collect(),
            topic,
        ));
    }
    Ok(specs
        .into_iter()
        .enumerate()
        .map(|(i, (text_en, query_type, target_types, topic))| EvalQuery {
            query_id: format!("q{:03}", i + 1),
            text_ko: korean_variant(&text_en),
            text_en,
            query_type,
            target_types,
            topic: topic.clone(),
        })
        .collect())
}

/// Korean rendering through the mock dictionary; only when every word is
/// covered, so the variant is a faithful translation.
fn korean_variant(text_en: &str) -> Option<String> {
    let ko = MockTranslator.translate(text_en, "en", "ko").ok()?;
    let untranslated = tokenize(&ko).iter().any(|t| t.is_ascii());
    (!untranslated).then_some(ko)
}

/// Files whose topic is the query topic and whose type is targeted.
pub fn relevant_ids(corpus: &CorpusStore, q: &EvalQuery) -> BTreeSet<String> {
    corpus
        .files()
        .iter()
        .filter(|f| f.topic == q.topic && q.target_types.contains(&f.file_type))
        .map(|f| f.file_id.clone())
        .collect()
}
