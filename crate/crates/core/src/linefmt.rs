//! Line-oriented `key words: value` format shared by game and population spec files.
//!
//! Each non-blank line that does not start with `#` has the shape
//! `<head> : <value>`, where the head is one or more whitespace-separated
//! words. Whitespace around the separator and between words is ignored.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    /// 1-based line number in the source text.
    pub number: usize,
    pub head: Vec<String>,
    pub value: String,
}

impl Line {
    pub fn keyword(&self) -> &str {
        &self.head[0]
    }

    /// Head words after the keyword.
    pub fn args(&self) -> &[String] {
        &self.head[1..]
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.number, msg)
    }
}

pub fn parse_lines(text: &str) -> Result<Vec<Line>> {
    let mut lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let number = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (head, value) = trimmed
            .split_once(':')
            .ok_or_else(|| Error::parse(number, "expected `<key>: <value>`"))?;
        let head: Vec<String> = head.split_whitespace().map(str::to_owned).collect();
        if head.is_empty() {
            return Err(Error::parse(number, "missing key before `:`"));
        }
        lines.push(Line {
            number,
            head,
            value: value.trim().to_owned(),
        });
    }
    Ok(lines)
}

/// Splits a comma-separated list, trimming each item and rejecting empty items.
pub fn comma_list(line: &Line) -> Result<Vec<String>> {
    let items: Vec<String> = line.value.split(',').map(|s| s.trim().to_owned()).collect();
    if items.iter().any(String::is_empty) {
        return Err(line.error("empty item in comma-separated list"));
    }
    Ok(items)
}
