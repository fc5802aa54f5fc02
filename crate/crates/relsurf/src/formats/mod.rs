//! File formats and text parsers: the circuit description (JSON), the atom
//! table (JSON), proposition expressions, and deduction scripts (text).
//! Parsers reject malformed input with line/column diagnostics.

pub mod atoms;
pub mod circuit;
pub mod deduction_text;
pub mod prop_expr;

use std::fmt;
use std::path::PathBuf;

#[derive(Clone, Debug)]
pub struct ParseError {
    pub path: Option<PathBuf>,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError { path: None, line, col, message: message.into() }
    }

    pub fn with_path(mut self, path: impl Into<PathBuf>) -> Self {
        self.path = Some(path.into());
        self
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.path {
            Some(p) => write!(f, "{}:{}:{}: {}", p.display(), self.line, self.col, self.message),
            None => write!(f, "{}:{}: {}", self.line, self.col, self.message),
        }
    }
}

impl std::error::Error for ParseError {}

pub(crate) fn from_serde_json(e: &serde_json::Error) -> ParseError {
    ParseError::new(e.line(), e.column(), e.to_string())
}
