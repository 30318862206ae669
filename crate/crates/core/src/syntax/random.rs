//! Seeded generator of well-typed, terminating MJ programs for property
//! tests and fuzzing.
//!
//! Every loop is bounded by a counter the body never writes, `continue`
//! only appears where the loop update still runs, and calls only go to
//! methods defined later in the program, so every run halts. Runtime
//! errors (division by zero, out-of-range indexing) remain possible.

use super::ast::{Ast, NodeKind, Type};
use crate::numerics::Pcg32;

const NAMES: &[&str] = &["a", "b", "c", "n", "m", "k", "s", "t", "x", "y", "z", "acc", "idx", "tmp", "lo", "hi"];

/// Size limits for [`random_program`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomProgramConfig {
    pub max_helpers: usize,
    pub max_params: usize,
    pub max_block_len: usize,
    pub max_stmt_depth: usize,
    pub max_expr_depth: usize,
    pub max_loop_bound: i64,
}

impl Default for RandomProgramConfig {
    fn default() -> Self {
        RandomProgramConfig {
            max_helpers: 2,
            max_params: 3,
            max_block_len: 5,
            max_stmt_depth: 3,
            max_expr_depth: 3,
            max_loop_bound: 5,
        }
    }
}

#[derive(Debug, Clone)]
struct Signature {
    name: String,
    params: Vec<Type>,
    ret: Type,
}

#[derive(Debug, Clone)]
struct Var {
    name: String,
    ty: Type,
    writable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Enclosing {
    /// `break` and `continue` both allowed.
    For,
    /// `break` allowed; `continue` would skip the counter update.
    Counted,
    /// Inside a switch arm within no loop that permits `continue`.
    Switch,
}

struct Gen<'a> {
    rng: &'a mut Pcg32,
    config: RandomProgramConfig,
    callees: Vec<Signature>,
    scope: Vec<Var>,
    fresh: usize,
    ret: Type,
}

/// A random program whose first method is the entry point.
pub fn random_program(rng: &mut Pcg32, config: &RandomProgramConfig) -> Ast {
    let helpers = rng.index(config.max_helpers + 1);
    let mut signatures: Vec<Signature> = Vec::new();
    for i in 0..=helpers {
        let params = (0..rng.index(config.max_params + 1)).map(|_| random_type(rng)).collect();
        let ret = if rng.coin() { Type::Int } else { Type::Bool };
        let name = if i == 0 { "f".to_string() } else { format!("g{i}") };
        signatures.push(Signature { name, params, ret });
    }
    let mut methods = Vec::new();
    for i in 0..signatures.len() {
        let callees = signatures[i + 1..].to_vec();
        let mut g = Gen { rng: &mut *rng, config: *config, callees, scope: Vec::new(), fresh: 0, ret: signatures[i].ret };
        methods.push(g.method(&signatures[i]));
    }
    let mut tree = Ast::new(NodeKind::Program, None, methods);
    tree.renumber();
    tree
}

fn random_type(rng: &mut Pcg32) -> Type {
    match rng.index(4) {
        0 | 1 => Type::Int,
        2 => Type::Bool,
        _ => Type::IntArray,
    }
}

impl Gen<'_> {
    fn fresh_name(&mut self) -> String {
        let i = self.fresh;
        self.fresh += 1;
        match NAMES.get(i) {
            Some(n) => n.to_string(),
            None => format!("v{i}"),
        }
    }

    fn declare(&mut self, ty: Type, writable: bool) -> String {
        let name = self.fresh_name();
        self.scope.push(Var { name: name.clone(), ty, writable });
        name
    }

    fn vars(&self, ty: Type, writable_only: bool) -> Vec<String> {
        self.scope.iter().filter(|v| v.ty == ty && (v.writable || !writable_only)).map(|v| v.name.clone()).collect()
    }

    fn method(&mut self, sig: &Signature) -> Ast {
        let mut children: Vec<Ast> = sig
            .params
            .iter()
            .map(|ty| {
                let name = self.declare(*ty, true);
                Ast::typed(NodeKind::Param, name, *ty, Vec::new())
            })
            .collect();
        let mut body = self.stmts(0, None);
        body.push(Ast::new(NodeKind::Return, None, vec![self.expr(self.ret, self.config.max_expr_depth)]));
        children.push(Ast::block(body));
        Ast::typed(NodeKind::Method, sig.name.clone(), sig.ret, children)
    }

    fn lit(&mut self, lo: i64, hi: i64) -> Ast {
        Ast::int_lit(self.rng.range_i64(lo, hi))
    }

    fn expr(&mut self, ty: Type, depth: usize) -> Ast {
        match ty {
            Type::Int => self.int_expr(depth),
            Type::Bool => self.bool_expr(depth),
            Type::IntArray => self.array_expr(),
        }
    }

    fn array_expr(&mut self) -> Ast {
        let arrays = self.vars(Type::IntArray, false);
        if !arrays.is_empty() && self.rng.coin() {
            return Ast::ident(self.rng.choose(&arrays).expect("nonempty").clone());
        }
        let len = self.lit(0, 4);
        Ast::new(NodeKind::NewArray, None, vec![len])
    }

    fn call(&mut self, ret: Type, depth: usize) -> Option<Ast> {
        let candidates: Vec<Signature> = self.callees.iter().filter(|s| s.ret == ret).cloned().collect();
        let sig = self.rng.choose(&candidates)?.clone();
        let args = sig.params.iter().map(|ty| self.expr(*ty, depth.saturating_sub(1))).collect();
        Some(Ast::new(NodeKind::Call, Some(sig.name), args))
    }

    fn int_expr(&mut self, depth: usize) -> Ast {
        let ints = self.vars(Type::Int, false);
        if depth == 0 || self.rng.index(3) == 0 {
            return match ints.is_empty() || self.rng.coin() {
                true => self.lit(-20, 20),
                false => Ast::ident(self.rng.choose(&ints).expect("nonempty").clone()),
            };
        }
        let arrays = self.vars(Type::IntArray, false);
        match self.rng.index(8) {
            0..=3 => {
                let op = *self.rng.choose(&["+", "-", "*", "/", "%", "+", "-", "*"]).expect("nonempty");
                Ast::binary(op, self.int_expr(depth - 1), self.int_expr(depth - 1))
            }
            4 => Ast::unary("-", self.int_expr(depth - 1)),
            5 if !arrays.is_empty() => {
                let a = Ast::ident(self.rng.choose(&arrays).expect("nonempty").clone());
                Ast::new(NodeKind::Call, Some("len".to_string()), vec![a])
            }
            6 if !arrays.is_empty() => {
                let a = Ast::ident(self.rng.choose(&arrays).expect("nonempty").clone());
                Ast::new(NodeKind::Index, None, vec![a, self.int_expr(depth - 1)])
            }
            7 => self.call(Type::Int, depth).unwrap_or_else(|| self.lit(0, 9)),
            _ => self.int_expr(depth - 1),
        }
    }

    fn bool_expr(&mut self, depth: usize) -> Ast {
        let bools = self.vars(Type::Bool, false);
        if depth == 0 || self.rng.index(4) == 0 {
            return match bools.is_empty() || self.rng.coin() {
                true => Ast::bool_lit(self.rng.coin()),
                false => Ast::ident(self.rng.choose(&bools).expect("nonempty").clone()),
            };
        }
        match self.rng.index(6) {
            0 | 1 => {
                let op = *self.rng.choose(&["<", "<=", ">", ">=", "==", "!="]).expect("nonempty");
                Ast::binary(op, self.int_expr(depth - 1), self.int_expr(depth - 1))
            }
            2 => {
                let op = *self.rng.choose(&["&&", "||", "==", "!="]).expect("nonempty");
                Ast::binary(op, self.bool_expr(depth - 1), self.bool_expr(depth - 1))
            }
            3 => Ast::unary("!", self.bool_expr(depth - 1)),
            4 => self.call(Type::Bool, depth).unwrap_or_else(|| Ast::bool_lit(true)),
            _ => self.bool_expr(depth - 1),
        }
    }

    /// A statement list in a fresh scope.
    fn stmts(&mut self, depth: usize, enclosing: Option<Enclosing>) -> Vec<Ast> {
        let mark = self.scope.len();
        let len = self.rng.index(self.config.max_block_len + 1);
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            out.extend(self.stmt(depth, enclosing));
        }
        self.scope.truncate(mark);
        out
    }

    fn block(&mut self, depth: usize, enclosing: Option<Enclosing>) -> Ast {
        Ast::block(self.stmts(depth, enclosing))
    }

    fn bound(&mut self) -> Ast {
        self.lit(0, self.config.max_loop_bound)
    }

    /// One statement, or a counter declaration followed by a loop.
    fn stmt(&mut self, depth: usize, enclosing: Option<Enclosing>) -> Vec<Ast> {
        let compound = depth < self.config.max_stmt_depth;
        let e = self.config.max_expr_depth;
        match self.rng.index(if compound { 14 } else { 6 }) {
            0 | 1 => {
                let ty = random_type(self.rng);
                let init = self.expr(ty, e);
                let name = self.declare(ty, true);
                vec![Ast::var_decl(name, ty, init)]
            }
            2 | 3 => {
                let ty = if self.rng.index(3) == 0 { Type::Bool } else { Type::Int };
                let targets = self.vars(ty, true);
                let arrays = self.vars(Type::IntArray, false);
                if self.rng.index(4) == 0 && !arrays.is_empty() {
                    let a = Ast::ident(self.rng.choose(&arrays).expect("nonempty").clone());
                    let target = Ast::new(NodeKind::Index, None, vec![a, self.int_expr(1)]);
                    return vec![Ast::assign(target, self.int_expr(e))];
                }
                match self.rng.choose(&targets).cloned() {
                    Some(t) => vec![Ast::assign(Ast::ident(t), self.expr(ty, e))],
                    None => Vec::new(),
                }
            }
            4 => match enclosing {
                Some(Enclosing::For) if self.rng.coin() => vec![Ast::leaf(NodeKind::Continue)],
                Some(_) => vec![guarded_break(self.bool_expr(1))],
                None => {
                    let value = self.expr(self.ret, e);
                    vec![Ast::new(NodeKind::If, None, vec![self.bool_expr(2), Ast::block(vec![Ast::new(NodeKind::Return, None, vec![value])])])]
                }
            },
            5 => {
                let ty = if self.rng.coin() { Type::Int } else { Type::Bool };
                match self.call(ty, e) {
                    Some(call) => vec![Ast::new(NodeKind::ExprStmt, None, vec![call])],
                    None => Vec::new(),
                }
            }
            6 | 7 => vec![self.if_stmt(depth, enclosing)],
            8 | 9 => self.for_loop(depth),
            10 => self.counted_loop(depth),
            11 => self.switch(depth, enclosing),
            12 => vec![self.block(depth + 1, enclosing)],
            _ => {
                let ty = if self.rng.coin() { Type::Int } else { Type::Bool };
                vec![Ast::new(NodeKind::ExprStmt, None, vec![self.expr(ty, 1)])]
            }
        }
    }

    fn if_stmt(&mut self, depth: usize, enclosing: Option<Enclosing>) -> Ast {
        let cond = self.bool_expr(self.config.max_expr_depth);
        let then = self.block(depth + 1, enclosing);
        let mut children = vec![cond, then];
        match self.rng.index(3) {
            0 => children.push(self.block(depth + 1, enclosing)),
            1 if depth < self.config.max_stmt_depth => children.push(self.if_stmt(depth + 1, enclosing)),
            _ => {}
        }
        Ast::new(NodeKind::If, None, children)
    }

    fn for_loop(&mut self, depth: usize) -> Vec<Ast> {
        let mark = self.scope.len();
        let bound = self.bound();
        let i = self.declare(Type::Int, false);
        let init = Ast::var_decl(i.clone(), Type::Int, Ast::int_lit(0));
        let cond = Ast::binary("<", Ast::ident(i.clone()), bound);
        let update = Ast::assign(Ast::ident(i.clone()), Ast::binary("+", Ast::ident(i), Ast::int_lit(1)));
        let body = self.block(depth + 1, Some(Enclosing::For));
        self.scope.truncate(mark);
        vec![Ast::new(NodeKind::For, None, vec![init, cond, update, body])]
    }

    /// `int w = 0; while (w < K) { ...; w = w + 1; }` or the equivalent
    /// `for (; w < K; w = w + 1)` form.
    fn counted_loop(&mut self, depth: usize) -> Vec<Ast> {
        let bound = self.bound();
        let w = self.declare(Type::Int, false);
        let decl = Ast::var_decl(w.clone(), Type::Int, Ast::int_lit(0));
        let cond = Ast::binary("<", Ast::ident(w.clone()), bound);
        let step = Ast::assign(Ast::ident(w.clone()), Ast::binary("+", Ast::ident(w), Ast::int_lit(1)));
        if self.rng.coin() {
            let mut body = self.stmts(depth + 1, Some(Enclosing::Counted));
            body.push(step);
            vec![decl, Ast::new(NodeKind::While, None, vec![cond, Ast::block(body)])]
        } else {
            let body = self.block(depth + 1, Some(Enclosing::For));
            vec![decl, Ast::new(NodeKind::For, None, vec![Ast::leaf(NodeKind::Empty), cond, step, body])]
        }
    }

    fn switch(&mut self, depth: usize, enclosing: Option<Enclosing>) -> Vec<Ast> {
        let subject = self.int_expr(2);
        let inner = match enclosing {
            Some(Enclosing::For) => Enclosing::For,
            _ => Enclosing::Switch,
        };
        let mut labels: Vec<i64> = (-3..=5).collect();
        self.rng.shuffle(&mut labels);
        let cases = 1 + self.rng.index(4);
        let default_at = if self.rng.coin() { Some(self.rng.index(cases + 1)) } else { None };
        let mut children = vec![subject];
        let mut labels = labels.into_iter();
        for i in 0..=cases {
            let token = if default_at == Some(i) {
                None
            } else if i < cases {
                Some(labels.next().expect("enough labels").to_string())
            } else {
                continue;
            };
            // Arms share one scope, so an arm that declares is wrapped in a block.
            let mut stmts = self.stmts(depth + 1, Some(inner));
            if stmts.iter().any(|s| s.kind == NodeKind::VarDecl) {
                stmts = vec![Ast::block(stmts)];
            }
            if self.rng.index(5) != 0 {
                stmts.push(Ast::leaf(NodeKind::Break));
            }
            children.push(Ast::new(NodeKind::Case, token, stmts));
        }
        vec![Ast::new(NodeKind::Switch, None, children)]
    }
}

/// `if (cond) { break; }`
fn guarded_break(cond: Ast) -> Ast {
    Ast::new(NodeKind::If, None, vec![cond, Ast::block(vec![Ast::leaf(NodeKind::Break)])])
}
