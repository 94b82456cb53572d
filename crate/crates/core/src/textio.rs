//! Small helpers shared by the text formats.

use std::io::BufRead;

use crate::error::{Error, Result};

/// Decimal rendering with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    format!("{x:.16e}")
}

/// Parses a decimal field; `line` is 1-based and only used for the error.
pub fn parse_num(field: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::format(line, format!("expected a number, got {:?}", field.trim())))
}

pub fn parse_id(field: &str, line: usize) -> Result<usize> {
    field
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::format(line, format!("expected a node id, got {:?}", field.trim())))
}

/// A non-empty line of a text file with its 1-based line number.
pub struct Line {
    pub number: usize,
    pub text: String,
}

impl Line {
    pub fn is_comment(&self) -> bool {
        self.text.starts_with('#')
    }

    pub fn fields(&self) -> Vec<&str> {
        self.text.split(',').map(str::trim).collect()
    }
}

/// Reads every non-blank line, trimmed.
pub fn lines<R: BufRead>(reader: R) -> Result<Vec<Line>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if !text.is_empty() {
            out.push(Line {
                number: idx + 1,
                text: text.to_string(),
            });
        }
    }
    Ok(out)
}
