use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::tokenize::tokenize_spans;
use super::IndexError;

/// Indexed unit of text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub chunk_id: String,
    pub file_id: String,
    pub ordinal: u32,
    /// Verbatim slice of the source text covering the chunk's tokens.
    pub text: String,
    pub token_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChunkParams {
    pub chunk_size: usize,
    pub overlap: usize,
}

impl Default for ChunkParams {
    fn default() -> Self {
        ChunkParams { chunk_size: 256, overlap: 32 }
    }
}

impl ChunkParams {
    pub fn validate(&self) -> Result<(), IndexError> {
        if self.chunk_size == 0 || self.chunk_size <= self.overlap {
            return Err(IndexError::InvalidChunkParams { chunk_size: self.chunk_size, overlap: self.overlap });
        }
        Ok(())
    }
}

/// Sliding token window: windows start every `chunk_size - overlap` tokens
/// and the last window ends at the final token. Text without tokens yields
/// no chunks.
pub fn chunk_text(file_id: &str, text: &str, params: ChunkParams) -> Result<Vec<Chunk>, IndexError> {
    params.validate()?;
    let spans = tokenize_spans(text);
    let n = spans.len();
    let step = params.chunk_size - params.overlap;
    let mut chunks = Vec::new();
    let mut start = 0;
    while start < n {
        let end = (start + params.chunk_size).min(n);
        let byte_start = spans[start].0.start;
        let byte_end = spans[end - 1].0.end;
        let ordinal = chunks.len() as u32;
        chunks.push(Chunk {
            chunk_id: format!("{file_id}#{ordinal}"),
            file_id: file_id.to_string(),
            ordinal,
            text: text[byte_start..byte_end].to_string(),
            token_count: end - start,
        });
        if end == n {
            break;
        }
        start += step;
    }
    Ok(chunks)
}
