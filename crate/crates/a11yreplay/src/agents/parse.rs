//! Extraction and validation of structured JSON from model responses.
//!
//! Models wrap their JSON in prose or fenced code blocks often enough that
//! we search fenced blocks first, then the whole text, for the first
//! balanced top-level object literal.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("no JSON object found in response")]
    NoObject,
    #[error("invalid JSON object: {0}")]
    BadJson(String),
    #[error("{0}")]
    BadShape(String),
}

/// Returns the first balanced `{...}` literal, preferring fenced blocks.
pub fn extract_structured_block(response: &str) -> Result<&str, ParseError> {
    for fence in fenced_blocks(response) {
        if let Some(obj) = first_balanced_object(fence) {
            return Ok(obj);
        }
    }
    first_balanced_object(response).ok_or(ParseError::NoObject)
}

/// Contents of every ``` fenced block, in order.
fn fenced_blocks(text: &str) -> Vec<&str> {
    let mut blocks = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find("```") {
        let after_open = &rest[open + 3..];
        // Skip the info string (language tag) up to the first newline.
        let content_start = after_open.find('\n').map(|i| i + 1).unwrap_or(0);
        let content = &after_open[content_start..];
        match content.find("```") {
            Some(close) => {
                blocks.push(&content[..close]);
                rest = &content[close + 3..];
            }
            None => break,
        }
    }
    blocks
}

/// Scans for the first `{` and returns the slice up to its matching `}`,
/// respecting string literals and escapes.
fn first_balanced_object(text: &str) -> Option<&str> {
    let bytes = text.as_bytes();
    let start = bytes.iter().position(|&b| b == b'{')?;
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[start..=i]);
                }
            }
            _ => {}
        }
    }
    None
}

/// Extracts and deserializes the response's JSON object into `T`.
pub fn parse_response<T: serde::de::DeserializeOwned>(response: &str) -> Result<T, ParseError> {
    let block = extract_structured_block(response)?;
    serde_json::from_str(block).map_err(|e| ParseError::BadJson(e.to_string()))
}
