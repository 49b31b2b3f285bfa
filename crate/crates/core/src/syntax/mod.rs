//! JavaScript front end: lexer, parser and the arena syntax tree.

mod ast;
mod lexer;
mod parser;

pub use ast::*;

use alloc::string::String;

/// A syntax error at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub column: u32,
    pub message: String,
}

impl ParseError {
    pub(crate) fn at(pos: Pos, message: &str) -> Self {
        ParseError { line: pos.line, column: pos.column, message: message.into() }
    }
}

/// Parses one source file. `file` is recorded in the tree for diagnostics.
pub fn parse_source(text: &str, file: &str) -> Result<SyntaxTree, ParseError> {
    parser::Parser::new(text, file)?.parse_program()
}

pub(crate) use lexer::{is_id_continue, is_id_start};
