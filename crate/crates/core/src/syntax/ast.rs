//! Syntax tree for MJ programs.

use std::collections::BTreeMap;
use std::fmt;

/// Every node kind an MJ tree can contain.
///
/// `Empty` is the placeholder used for the omitted slots of a `for` header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Program,
    Method,
    Param,
    Block,
    VarDecl,
    Assign,
    If,
    While,
    For,
    Switch,
    Case,
    Break,
    Continue,
    Return,
    ExprStmt,
    Binary,
    Unary,
    Call,
    Index,
    NewArray,
    Ident,
    IntLit,
    BoolLit,
    Empty,
}

impl NodeKind {
    pub const ALL: [NodeKind; 24] = [
        NodeKind::Program,
        NodeKind::Method,
        NodeKind::Param,
        NodeKind::Block,
        NodeKind::VarDecl,
        NodeKind::Assign,
        NodeKind::If,
        NodeKind::While,
        NodeKind::For,
        NodeKind::Switch,
        NodeKind::Case,
        NodeKind::Break,
        NodeKind::Continue,
        NodeKind::Return,
        NodeKind::ExprStmt,
        NodeKind::Binary,
        NodeKind::Unary,
        NodeKind::Call,
        NodeKind::Index,
        NodeKind::NewArray,
        NodeKind::Ident,
        NodeKind::IntLit,
        NodeKind::BoolLit,
        NodeKind::Empty,
    ];

    /// Number of distinct kinds; the row count of the type-embedding table.
    pub const COUNT: usize = Self::ALL.len();

    /// Dense index in `0..COUNT`.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_statement(self) -> bool {
        matches!(
            self,
            NodeKind::Block
                | NodeKind::VarDecl
                | NodeKind::Assign
                | NodeKind::If
                | NodeKind::While
                | NodeKind::For
                | NodeKind::Switch
                | NodeKind::Break
                | NodeKind::Continue
                | NodeKind::Return
                | NodeKind::ExprStmt
        )
    }

    pub fn is_expression(self) -> bool {
        matches!(
            self,
            NodeKind::Binary
                | NodeKind::Unary
                | NodeKind::Call
                | NodeKind::Index
                | NodeKind::NewArray
                | NodeKind::Ident
                | NodeKind::IntLit
                | NodeKind::BoolLit
        )
    }
}

/// Declared type of a method, parameter or local.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Type {
    Int,
    Bool,
    IntArray,
}

impl Type {
    pub fn as_str(self) -> &'static str {
        match self {
            Type::Int => "int",
            Type::Bool => "bool",
            Type::IntArray => "int[]",
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A node of an MJ syntax tree.
///
/// Child layout per kind:
///
/// | kind      | token            | ty          | children                              |
/// |-----------|------------------|-------------|---------------------------------------|
/// | Program   | –                | –           | Method+                               |
/// | Method    | name             | return type | Param*, Block                         |
/// | Param     | name             | type        | –                                     |
/// | Block     | –                | –           | statements                            |
/// | VarDecl   | name             | type        | init expression                       |
/// | Assign    | –                | –           | target (Ident or Index), value        |
/// | If        | –                | –           | cond, then Block, [else Block or If]  |
/// | While     | –                | –           | cond, body Block                      |
/// | For       | –                | –           | init, cond, update, body Block        |
/// | Switch    | –                | –           | subject, Case*                        |
/// | Case      | label or `None`  | –           | statements                            |
/// | Return    | –                | –           | [value]                               |
/// | ExprStmt  | –                | –           | expression                            |
/// | Binary    | operator         | –           | lhs, rhs                              |
/// | Unary     | operator         | –           | operand                               |
/// | Call      | callee           | –           | arguments                             |
/// | Index     | –                | –           | array, index                          |
/// | NewArray  | –                | –           | length                                |
/// | Ident…    | text             | –           | –                                     |
///
/// A `default` case has no token. The `for` init slot holds a VarDecl,
/// Assign, ExprStmt or Empty; cond an expression or Empty; update an Assign,
/// ExprStmt or Empty.
///
/// Equality is structural: `id` is ignored.
#[derive(Debug, Clone)]
pub struct Ast {
    pub kind: NodeKind,
    pub token: Option<String>,
    pub ty: Option<Type>,
    pub children: Vec<Ast>,
    pub id: u32,
}

impl PartialEq for Ast {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.token == other.token
            && self.ty == other.ty
            && self.children == other.children
    }
}

impl Eq for Ast {}

/// Arity or payload violation found by [`Ast::validate`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed {kind:?} node #{id}: {reason}")]
pub struct ArityError {
    pub kind: NodeKind,
    pub id: u32,
    pub reason: String,
}

impl Ast {
    pub fn new(kind: NodeKind, token: Option<String>, children: Vec<Ast>) -> Self {
        Ast { kind, token, ty: None, children, id: 0 }
    }

    pub fn leaf(kind: NodeKind) -> Self {
        Ast::new(kind, None, Vec::new())
    }

    pub fn typed(kind: NodeKind, name: impl Into<String>, ty: Type, children: Vec<Ast>) -> Self {
        Ast { kind, token: Some(name.into()), ty: Some(ty), children, id: 0 }
    }

    pub fn ident(name: impl Into<String>) -> Self {
        Ast::new(NodeKind::Ident, Some(name.into()), Vec::new())
    }

    pub fn int_lit(value: i64) -> Self {
        if value < 0 {
            Ast::unary("-", Ast::new(NodeKind::IntLit, Some(value.unsigned_abs().to_string()), Vec::new()))
        } else {
            Ast::new(NodeKind::IntLit, Some(value.to_string()), Vec::new())
        }
    }

    pub fn bool_lit(value: bool) -> Self {
        Ast::new(NodeKind::BoolLit, Some(value.to_string()), Vec::new())
    }

    pub fn binary(op: &str, lhs: Ast, rhs: Ast) -> Self {
        Ast::new(NodeKind::Binary, Some(op.to_string()), vec![lhs, rhs])
    }

    pub fn unary(op: &str, operand: Ast) -> Self {
        Ast::new(NodeKind::Unary, Some(op.to_string()), vec![operand])
    }

    pub fn block(stmts: Vec<Ast>) -> Self {
        Ast::new(NodeKind::Block, None, stmts)
    }

    pub fn var_decl(name: impl Into<String>, ty: Type, init: Ast) -> Self {
        Ast::typed(NodeKind::VarDecl, name, ty, vec![init])
    }

    pub fn assign(target: Ast, value: Ast) -> Self {
        Ast::new(NodeKind::Assign, None, vec![target, value])
    }

    pub fn token_str(&self) -> &str {
        self.token.as_deref().unwrap_or("")
    }

    /// Preorder traversal.
    pub fn preorder(&self) -> Preorder<'_> {
        Preorder { stack: vec![self] }
    }

    pub fn node_count(&self) -> usize {
        self.preorder().count()
    }

    /// Multiset of node kinds, as a sorted count map.
    pub fn kind_multiset(&self) -> BTreeMap<NodeKind, usize> {
        let mut counts = BTreeMap::new();
        for node in self.preorder() {
            *counts.entry(node.kind).or_insert(0) += 1;
        }
        counts
    }

    /// Reassigns node ids in preorder starting at 0.
    pub fn renumber(&mut self) {
        let mut next = 0u32;
        let mut stack: Vec<&mut Ast> = vec![self];
        while let Some(node) = stack.pop() {
            node.id = next;
            next += 1;
            for child in node.children.iter_mut().rev() {
                stack.push(child);
            }
        }
    }

    /// Follows a path of child indices from `self`.
    pub fn at_path(&self, path: &[usize]) -> Option<&Ast> {
        let mut node = self;
        for &i in path {
            node = node.children.get(i)?;
        }
        Some(node)
    }

    pub fn at_path_mut(&mut self, path: &[usize]) -> Option<&mut Ast> {
        let mut node = self;
        for &i in path {
            node = node.children.get_mut(i)?;
        }
        Some(node)
    }

    /// Methods of a Program node.
    pub fn methods(&self) -> impl Iterator<Item = &Ast> {
        self.children.iter().filter(|c| c.kind == NodeKind::Method)
    }

    pub fn method(&self, name: &str) -> Option<&Ast> {
        self.methods().find(|m| m.token_str() == name)
    }

    /// Parameters of a Method node.
    pub fn params(&self) -> &[Ast] {
        debug_assert_eq!(self.kind, NodeKind::Method);
        &self.children[..self.children.len().saturating_sub(1)]
    }

    /// Body block of a Method node.
    pub fn body(&self) -> &Ast {
        debug_assert_eq!(self.kind, NodeKind::Method);
        self.children.last().expect("method has a body")
    }

    /// Checks arity and payload rules for every node.
    pub fn validate(&self) -> Result<(), ArityError> {
        for node in self.preorder() {
            node.validate_node()?;
        }
        Ok(())
    }

    fn validate_node(&self) -> Result<(), ArityError> {
        let fail = |reason: &str| {
            Err(ArityError { kind: self.kind, id: self.id, reason: reason.to_string() })
        };
        let n = self.children.len();
        let child_kinds_ok = |pred: fn(NodeKind) -> bool| self.children.iter().all(|c| pred(c.kind));
        let has_token = self.token.as_deref().is_some_and(|t| !t.is_empty());
        match self.kind {
            NodeKind::Program => {
                if n == 0 || !child_kinds_ok(|k| k == NodeKind::Method) {
                    return fail("program needs one or more methods");
                }
            }
            NodeKind::Method => {
                if !has_token || self.ty.is_none() || n == 0 {
                    return fail("method needs name, type and body");
                }
                if self.children[n - 1].kind != NodeKind::Block
                    || !self.children[..n - 1].iter().all(|c| c.kind == NodeKind::Param)
                {
                    return fail("method children must be params then a block");
                }
            }
            NodeKind::Param => {
                if !has_token || self.ty.is_none() || n != 0 {
                    return fail("param needs name and type");
                }
            }
            NodeKind::Block => {
                if !child_kinds_ok(NodeKind::is_statement) {
                    return fail("block children must be statements");
                }
            }
            NodeKind::VarDecl => {
                if !has_token || self.ty.is_none() || n != 1 || !self.children[0].kind.is_expression() {
                    return fail("declaration needs name, type and initializer");
                }
            }
            NodeKind::Assign => {
                if n != 2
                    || !matches!(self.children[0].kind, NodeKind::Ident | NodeKind::Index)
                    || !self.children[1].kind.is_expression()
                {
                    return fail("assignment needs an lvalue and a value");
                }
            }
            NodeKind::If => {
                if !(2..=3).contains(&n)
                    || !self.children[0].kind.is_expression()
                    || self.children[1].kind != NodeKind::Block
                    || (n == 3 && !matches!(self.children[2].kind, NodeKind::Block | NodeKind::If))
                {
                    return fail("if needs cond, then-block and optional else");
                }
            }
            NodeKind::While => {
                if n != 2 || !self.children[0].kind.is_expression() || self.children[1].kind != NodeKind::Block {
                    return fail("while needs cond and body block");
                }
            }
            NodeKind::For => {
                if n != 4 {
                    return fail("for needs four slots");
                }
                let [init, cond, update, body] = [&self.children[0], &self.children[1], &self.children[2], &self.children[3]];
                if !matches!(init.kind, NodeKind::VarDecl | NodeKind::Assign | NodeKind::ExprStmt | NodeKind::Empty)
                    || !(cond.kind == NodeKind::Empty || cond.kind.is_expression())
                    || !matches!(update.kind, NodeKind::Assign | NodeKind::ExprStmt | NodeKind::Empty)
                    || body.kind != NodeKind::Block
                {
                    return fail("for slots have wrong kinds");
                }
            }
            NodeKind::Switch => {
                if n == 0
                    || !self.children[0].kind.is_expression()
                    || !self.children[1..].iter().all(|c| c.kind == NodeKind::Case)
                {
                    return fail("switch needs subject then cases");
                }
            }
            NodeKind::Case => {
                if let Some(label) = &self.token {
                    if label.parse::<i64>().is_err() {
                        return fail("case label must be an integer");
                    }
                }
                if !child_kinds_ok(NodeKind::is_statement) {
                    return fail("case children must be statements");
                }
            }
            NodeKind::Break | NodeKind::Continue | NodeKind::Empty => {
                if n != 0 {
                    return fail("leaf statement has children");
                }
            }
            NodeKind::Return => {
                if n > 1 || !child_kinds_ok(NodeKind::is_expression) {
                    return fail("return takes at most one expression");
                }
            }
            NodeKind::ExprStmt => {
                if n != 1 || !self.children[0].kind.is_expression() {
                    return fail("expression statement needs one expression");
                }
            }
            NodeKind::Binary => {
                if !has_token || n != 2 || !child_kinds_ok(NodeKind::is_expression) {
                    return fail("binary needs operator and two operands");
                }
            }
            NodeKind::Unary => {
                if !has_token || n != 1 || !child_kinds_ok(NodeKind::is_expression) {
                    return fail("unary needs operator and one operand");
                }
            }
            NodeKind::Call => {
                if !has_token || !child_kinds_ok(NodeKind::is_expression) {
                    return fail("call needs callee and expression arguments");
                }
            }
            NodeKind::Index => {
                if n != 2 || !child_kinds_ok(NodeKind::is_expression) {
                    return fail("index needs array and position");
                }
            }
            NodeKind::NewArray => {
                if n != 1 || !child_kinds_ok(NodeKind::is_expression) {
                    return fail("new array needs a length");
                }
            }
            NodeKind::Ident | NodeKind::IntLit | NodeKind::BoolLit => {
                if !has_token || n != 0 {
                    return fail("leaf needs a token");
                }
            }
        }
        Ok(())
    }
}

/// Iterator returned by [`Ast::preorder`].
pub struct Preorder<'a> {
    stack: Vec<&'a Ast>,
}

impl<'a> Iterator for Preorder<'a> {
    type Item = &'a Ast;

    fn next(&mut self) -> Option<&'a Ast> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev());
        Some(node)
    }
}
