//! Tokenizer for MJ source text.

use std::fmt;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub line: u32,
    pub column: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Keyword,
    Identifier,
    IntLiteral,
    BoolLiteral,
    Punctuation,
    Operator,
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
}

impl Token {
    pub fn is(&self, kind: TokenKind, lexeme: &str) -> bool {
        self.kind == kind && self.lexeme == lexeme
    }
}

/// Lexeme given to the end-of-input sentinel.
pub const EOF_LEXEME: &str = "<eof>";

pub const KEYWORDS: &[&str] = &[
    "int", "bool", "if", "else", "while", "for", "switch", "case", "default", "break", "continue",
    "return", "new",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word) || word == "true" || word == "false"
}

/// A character outside the MJ alphabet.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{span}: unexpected character {found:?}")]
pub struct LexError {
    pub span: Span,
    pub found: char,
}

const TWO_CHAR_OPS: &[&str] = &["<=", ">=", "==", "!=", "&&", "||"];
const ONE_CHAR_OPS: &str = "+-*/%<>=!";
const PUNCTUATION: &str = "(){}[];,:";

/// Splits `source` into tokens followed by an EOF sentinel.
///
/// `\r` is treated as whitespace so CRLF input lexes like LF input.
pub fn lex(source: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let (mut line, mut column) = (1u32, 1u32);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, column };
        if c == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        }
        if c == ' ' || c == '\t' || c == '\r' {
            column += 1;
            i += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let kind = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if word == "true" || word == "false" {
                TokenKind::BoolLiteral
            } else if KEYWORDS.contains(&word.as_str()) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            }
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            TokenKind::IntLiteral
        } else if PUNCTUATION.contains(c) {
            i += 1;
            TokenKind::Punctuation
        } else {
            let pair: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            if TWO_CHAR_OPS.contains(&pair.as_str()) {
                i += 2;
            } else if ONE_CHAR_OPS.contains(c) {
                i += 1;
            } else {
                return Err(LexError { span, found: c });
            }
            TokenKind::Operator
        };
        column += (i - start) as u32;
        tokens.push(Token { kind, lexeme: chars[start..i].iter().collect(), span });
    }
    tokens.push(Token { kind: TokenKind::Eof, lexeme: EOF_LEXEME.to_string(), span: Span { line, column } });
    Ok(tokens)
}
