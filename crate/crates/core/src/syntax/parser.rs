//! Recursive-descent parser producing [`Ast`] trees.

use super::ast::{Ast, NodeKind, Type};
use super::lexer::{Span, Token, TokenKind};

/// Maximum nesting of statements plus expressions accepted by the parser.
pub const MAX_NESTING: usize = 200;

/// First syntax violation in a token stream.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{span}: expected {}, found {found:?}", expected.join(" or "))]
pub struct ParseError {
    pub span: Span,
    pub expected: Vec<String>,
    pub found: String,
}

type PResult<T> = Result<T, ParseError>;

/// Parses a complete program. The token list must end with the EOF sentinel.
pub fn parse(tokens: &[Token]) -> PResult<Ast> {
    let mut parser = Parser { tokens, pos: 0, depth: 0 };
    let mut tree = parser.program()?;
    tree.renumber();
    Ok(tree)
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    depth: usize,
}

fn binary_precedence(op: &str) -> Option<u8> {
    Some(match op {
        "||" => 1,
        "&&" => 2,
        "==" | "!=" => 3,
        "<" | "<=" | ">" | ">=" => 4,
        "+" | "-" => 5,
        "*" | "/" | "%" => 6,
        _ => return None,
    })
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_at(&self, offset: usize) -> &Token {
        &self.tokens[(self.pos + offset).min(self.tokens.len() - 1)]
    }

    fn advance(&mut self) -> &Token {
        let tok = &self.tokens[self.pos.min(self.tokens.len() - 1)];
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let tok = self.peek();
        Err(ParseError {
            span: tok.span,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: tok.lexeme.clone(),
        })
    }

    fn at_symbol(&self, lexeme: &str) -> bool {
        let tok = self.peek();
        matches!(tok.kind, TokenKind::Punctuation | TokenKind::Operator | TokenKind::Keyword) && tok.lexeme == lexeme
    }

    fn eat(&mut self, lexeme: &str) -> bool {
        if self.at_symbol(lexeme) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lexeme: &str) -> PResult<()> {
        if self.eat(lexeme) {
            Ok(())
        } else {
            self.error(&[lexeme])
        }
    }

    fn identifier(&mut self) -> PResult<String> {
        if self.peek().kind == TokenKind::Identifier {
            Ok(self.advance().lexeme.clone())
        } else {
            self.error(&["identifier"])
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return self.error(&["shallower nesting"]);
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn at_type(&self) -> bool {
        self.at_symbol("int") || self.at_symbol("bool")
    }

    fn ty(&mut self) -> PResult<Type> {
        if self.eat("int") {
            if self.at_symbol("[") && self.peek_at(1).lexeme == "]" {
                self.advance();
                self.advance();
                return Ok(Type::IntArray);
            }
            Ok(Type::Int)
        } else if self.eat("bool") {
            Ok(Type::Bool)
        } else {
            self.error(&["type"])
        }
    }

    fn program(&mut self) -> PResult<Ast> {
        let mut methods = vec![self.method()?];
        while self.peek().kind != TokenKind::Eof {
            methods.push(self.method()?);
        }
        Ok(Ast::new(NodeKind::Program, None, methods))
    }

    fn method(&mut self) -> PResult<Ast> {
        let ret = self.ty()?;
        let name = self.identifier()?;
        self.expect("(")?;
        let mut children = Vec::new();
        if !self.at_symbol(")") {
            loop {
                let ty = self.ty()?;
                let pname = self.identifier()?;
                children.push(Ast::typed(NodeKind::Param, pname, ty, Vec::new()));
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect(")")?;
        children.push(self.block()?);
        Ok(Ast::typed(NodeKind::Method, name, ret, children))
    }

    fn block(&mut self) -> PResult<Ast> {
        self.expect("{")?;
        self.enter()?;
        let mut stmts = Vec::new();
        while !self.at_symbol("}") {
            if self.peek().kind == TokenKind::Eof {
                return self.error(&["}"]);
            }
            stmts.push(self.statement()?);
        }
        self.advance();
        self.leave();
        Ok(Ast::block(stmts))
    }

    /// A loop or branch body; a bare statement is wrapped in a block.
    fn body(&mut self) -> PResult<Ast> {
        if self.at_symbol("{") {
            self.block()
        } else {
            Ok(Ast::block(vec![self.statement()?]))
        }
    }

    fn statement(&mut self) -> PResult<Ast> {
        self.enter()?;
        let stmt = self.statement_inner()?;
        self.leave();
        Ok(stmt)
    }

    fn statement_inner(&mut self) -> PResult<Ast> {
        if self.at_symbol("{") {
            return self.block();
        }
        if self.at_type() {
            let decl = self.var_decl()?;
            self.expect(";")?;
            return Ok(decl);
        }
        if self.eat("if") {
            return self.if_rest();
        }
        if self.eat("while") {
            self.expect("(")?;
            let cond = self.expression()?;
            self.expect(")")?;
            let body = self.body()?;
            return Ok(Ast::new(NodeKind::While, None, vec![cond, body]));
        }
        if self.eat("for") {
            self.expect("(")?;
            let init = if self.at_symbol(";") {
                Ast::leaf(NodeKind::Empty)
            } else if self.at_type() {
                self.var_decl()?
            } else {
                self.simple_statement()?
            };
            self.expect(";")?;
            let cond = if self.at_symbol(";") { Ast::leaf(NodeKind::Empty) } else { self.expression()? };
            self.expect(";")?;
            let update = if self.at_symbol(")") { Ast::leaf(NodeKind::Empty) } else { self.simple_statement()? };
            self.expect(")")?;
            let body = self.body()?;
            return Ok(Ast::new(NodeKind::For, None, vec![init, cond, update, body]));
        }
        if self.eat("switch") {
            return self.switch_rest();
        }
        if self.eat("break") {
            self.expect(";")?;
            return Ok(Ast::leaf(NodeKind::Break));
        }
        if self.eat("continue") {
            self.expect(";")?;
            return Ok(Ast::leaf(NodeKind::Continue));
        }
        if self.eat("return") {
            let children = if self.at_symbol(";") { Vec::new() } else { vec![self.expression()?] };
            self.expect(";")?;
            return Ok(Ast::new(NodeKind::Return, None, children));
        }
        let stmt = self.simple_statement()?;
        self.expect(";")?;
        Ok(stmt)
    }

    fn var_decl(&mut self) -> PResult<Ast> {
        let ty = self.ty()?;
        let name = self.identifier()?;
        self.expect("=")?;
        let init = self.expression()?;
        Ok(Ast::var_decl(name, ty, init))
    }

    /// Assignment or expression statement, without the trailing `;`.
    fn simple_statement(&mut self) -> PResult<Ast> {
        let start = self.pos;
        let lhs = self.expression()?;
        if self.at_symbol("=") {
            if !matches!(lhs.kind, NodeKind::Ident | NodeKind::Index) {
                self.pos = start;
                return self.error(&["assignable expression"]);
            }
            self.advance();
            let value = self.expression()?;
            return Ok(Ast::assign(lhs, value));
        }
        Ok(Ast::new(NodeKind::ExprStmt, None, vec![lhs]))
    }

    fn if_rest(&mut self) -> PResult<Ast> {
        self.expect("(")?;
        let cond = self.expression()?;
        self.expect(")")?;
        let then = self.body()?;
        let mut children = vec![cond, then];
        if self.eat("else") {
            if self.eat("if") {
                self.enter()?;
                children.push(self.if_rest()?);
                self.leave();
            } else {
                children.push(self.body()?);
            }
        }
        Ok(Ast::new(NodeKind::If, None, children))
    }

    fn switch_rest(&mut self) -> PResult<Ast> {
        self.expect("(")?;
        let subject = self.expression()?;
        self.expect(")")?;
        self.expect("{")?;
        let mut children = vec![subject];
        while !self.eat("}") {
            let label = if self.eat("case") {
                let negative = self.eat("-");
                if self.peek().kind != TokenKind::IntLiteral {
                    return self.error(&["integer literal"]);
                }
                let digits = self.peek().lexeme.clone();
                let text = if negative { format!("-{digits}") } else { digits };
                if text.parse::<i64>().is_err() {
                    return self.error(&["integer literal in range"]);
                }
                self.advance();
                Some(text)
            } else if self.eat("default") {
                None
            } else {
                return self.error(&["case", "default", "}"]);
            };
            self.expect(":")?;
            let mut stmts = Vec::new();
            while !(self.at_symbol("case") || self.at_symbol("default") || self.at_symbol("}")) {
                if self.peek().kind == TokenKind::Eof {
                    return self.error(&["}"]);
                }
                stmts.push(self.statement()?);
            }
            children.push(Ast::new(NodeKind::Case, label, stmts));
        }
        Ok(Ast::new(NodeKind::Switch, None, children))
    }

    pub fn expression(&mut self) -> PResult<Ast> {
        self.binary(1)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Ast> {
        self.enter()?;
        let mut lhs = self.unary()?;
        loop {
            let tok = self.peek();
            let prec = match (tok.kind, binary_precedence(&tok.lexeme)) {
                (TokenKind::Operator, Some(p)) if p >= min_prec => p,
                _ => break,
            };
            let op = self.advance().lexeme.clone();
            let rhs = self.binary(prec + 1)?;
            lhs = Ast::binary(&op, lhs, rhs);
        }
        self.leave();
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Ast> {
        if self.at_symbol("-") || self.at_symbol("!") {
            let op = self.advance().lexeme.clone();
            self.enter()?;
            let operand = self.unary()?;
            self.leave();
            return Ok(Ast::unary(&op, operand));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Ast> {
        let mut expr = self.primary()?;
        if expr.kind == NodeKind::NewArray {
            return Ok(expr);
        }
        while self.eat("[") {
            let index = self.expression()?;
            self.expect("]")?;
            expr = Ast::new(NodeKind::Index, None, vec![expr, index]);
        }
        Ok(expr)
    }

    fn primary(&mut self) -> PResult<Ast> {
        let tok = self.peek().clone();
        match tok.kind {
            TokenKind::IntLiteral => {
                if tok.lexeme.parse::<i64>().is_err() {
                    return self.error(&["integer literal in range"]);
                }
                self.advance();
                Ok(Ast::new(NodeKind::IntLit, Some(tok.lexeme), Vec::new()))
            }
            TokenKind::BoolLiteral => {
                self.advance();
                Ok(Ast::new(NodeKind::BoolLit, Some(tok.lexeme), Vec::new()))
            }
            TokenKind::Identifier => {
                self.advance();
                if self.eat("(") {
                    let mut args = Vec::new();
                    if !self.at_symbol(")") {
                        loop {
                            args.push(self.expression()?);
                            if !self.eat(",") {
                                break;
                            }
                        }
                    }
                    self.expect(")")?;
                    Ok(Ast::new(NodeKind::Call, Some(tok.lexeme), args))
                } else {
                    Ok(Ast::ident(tok.lexeme))
                }
            }
            _ if self.at_symbol("(") => {
                self.advance();
                let inner = self.expression()?;
                self.expect(")")?;
                Ok(inner)
            }
            _ if self.at_symbol("new") => {
                self.advance();
                self.expect("int")?;
                self.expect("[")?;
                let len = self.expression()?;
                self.expect("]")?;
                Ok(Ast::new(NodeKind::NewArray, None, vec![len]))
            }
            _ => self.error(&["expression"]),
        }
    }
}
