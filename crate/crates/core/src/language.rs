//! Query-side translation into English and response-side translation back
//! into the user's language. Every provider failure degrades to
//! pass-through; nothing here returns an error.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::providers::{DetectionProvider, TranslationProvider};
use crate::synthesis::find_citation_markers;

/// Detections below this confidence fall back to English.
pub const DETECTION_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageTag {
    pub code: String,
    pub confidence: f64,
}

impl LanguageTag {
    pub fn new(code: impl Into<String>, confidence: f64) -> Self {
        LanguageTag { code: code.into(), confidence }
    }

    pub fn english(confidence: f64) -> Self {
        LanguageTag::new("en", confidence)
    }

    pub fn is_english(&self) -> bool {
        self.code == "en"
    }

    /// Two lowercase ASCII letters.
    pub fn is_valid(&self) -> bool {
        self.code.len() == 2 && self.code.bytes().all(|b| b.is_ascii_lowercase())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub tag: LanguageTag,
    /// Set when the provider's answer was not used as is.
    pub note: Option<String>,
}

pub fn detect_language(text: &str, detector: &dyn DetectionProvider) -> Detection {
    match detector.detect(text) {
        Ok(tag) if !tag.is_valid() => Detection {
            note: Some(format!("detector returned invalid code {:?}; using en", tag.code)),
            tag: LanguageTag::english(0.0),
        },
        Ok(tag) if tag.confidence < DETECTION_THRESHOLD => Detection {
            note: Some(format!(
                "detected {} with confidence {:.3} below threshold; using en",
                tag.code, tag.confidence
            )),
            tag: LanguageTag::english(tag.confidence),
        },
        Ok(tag) => Detection { tag, note: None },
        Err(e) => Detection { tag: LanguageTag::english(0.0), note: Some(format!("detection failed ({e}); using en")) },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslatedQuery {
    pub original: String,
    pub original_lang: LanguageTag,
    pub english: String,
    pub bypassed: bool,
    pub degraded: bool,
}

pub fn to_english(text: &str, lang: &LanguageTag, translator: &dyn TranslationProvider) -> TranslatedQuery {
    let mut out = TranslatedQuery {
        original: text.to_string(),
        original_lang: lang.clone(),
        english: text.to_string(),
        bypassed: lang.is_english(),
        degraded: false,
    };
    if !out.bypassed {
        match translator.translate(text, &lang.code, "en") {
            Ok(en) => out.english = en,
            Err(_) => out.degraded = true,
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackTranslation {
    pub text: String,
    pub degraded: bool,
}

fn placeholder(i: usize) -> String {
    format!("⟦{i}⟧")
}

/// Replace every citation marker with an opaque numbered placeholder.
pub fn mask_citations(text: &str) -> (String, Vec<String>) {
    let mut masked = String::with_capacity(text.len());
    let mut markers = Vec::new();
    let mut last = 0;
    for (range, _) in find_citation_markers(text) {
        masked.push_str(&text[last..range.start]);
        masked.push_str(&placeholder(markers.len()));
        markers.push(text[range.clone()].to_string());
        last = range.end;
    }
    masked.push_str(&text[last..]);
    (masked, markers)
}

/// Put markers back. A placeholder the translator lost is re-attached at the
/// end so no citation disappears.
pub fn unmask_citations(text: &str, markers: &[String]) -> String {
    let mut out = text.to_string();
    let mut lost = Vec::new();
    for (i, m) in markers.iter().enumerate() {
        let p = placeholder(i);
        if out.contains(&p) {
            out = out.replacen(&p, m, 1);
        } else {
            lost.push(m.as_str());
        }
    }
    if !lost.is_empty() {
        out.push(' ');
        out.push_str(&lost.join(" "));
    }
    out
}

pub fn from_english(text: &str, target: &LanguageTag, translator: &dyn TranslationProvider) -> BackTranslation {
    if target.is_english() {
        return BackTranslation { text: text.to_string(), degraded: false };
    }
    let (masked, markers) = mask_citations(text);
    match translator.translate(&masked, "en", &target.code) {
        Ok(t) => BackTranslation { text: unmask_citations(&t, &markers), degraded: false },
        Err(_) => BackTranslation { text: text.to_string(), degraded: true },
    }
}
