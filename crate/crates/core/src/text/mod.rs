//! Textual front end: `.ir` parser/printer and a DOT exporter for
//! e-graph visualization.

pub(crate) mod lexer;
mod parser;
mod printer;

pub mod dot;

pub use parser::parse_module;
pub use printer::print_module;

use std::fmt;

/// A parse-time (or parse-surfaced verification) failure at a 1-based
/// source position.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SourceDiagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for SourceDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}
