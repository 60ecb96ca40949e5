use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

/// Lowercased maximal runs of alphanumeric characters. Segmentation is
/// decided on the original characters, so every term maps back to a byte
/// span of the input.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_spans(text).into_iter().map(|(_, t)| t).collect()
}

/// Like [`tokenize`], also returning each term's byte range in `text`.
pub fn tokenize_spans(text: &str) -> Vec<(Range<usize>, String)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if c.is_alphanumeric() {
            if start.is_none() {
                start = Some(i);
            }
        } else if let Some(s) = start.take() {
            out.push((s..i, lower(&text[s..i])));
        }
    }
    if let Some(s) = start {
        out.push((s..text.len(), lower(&text[s..])));
    }
    out
}

fn lower(s: &str) -> String {
    s.chars().flat_map(char::to_lowercase).collect()
}
