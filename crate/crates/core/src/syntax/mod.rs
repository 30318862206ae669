//! The MJ mini-language: lexer, parser, syntax tree and canonical printer.
//!
//! MJ is a small Java-like language: top-level methods over `int`, `bool`
//! and `int[]`, with `if`/`else`, `while`, `for`, `switch`, `break`,
//! `continue` and `return`.

mod ast;
mod lexer;
mod parser;
mod printer;
mod random;

pub use ast::{ArityError, Ast, NodeKind, Preorder, Type};
pub use lexer::{is_keyword, lex, LexError, Span, Token, TokenKind, EOF_LEXEME, KEYWORDS};
pub use parser::{parse, ParseError, MAX_NESTING};
pub use printer::{expr as print_expr, print};
pub use random::{random_program, RandomProgramConfig};

/// Names resolved by the interpreter without a user definition.
pub const BUILTIN_NAMES: &[&str] = &["len"];

/// Either stage of turning source text into a tree.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SyntaxError {
    #[error("lex error: {0}")]
    Lex(#[from] LexError),
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
}

/// Lexes and parses `source` in one step.
pub fn parse_source(source: &str) -> Result<Ast, SyntaxError> {
    let tokens = lex(source)?;
    Ok(parse(&tokens)?)
}
