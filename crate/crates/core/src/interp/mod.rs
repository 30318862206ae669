//! Reference interpreter for MJ.
//!
//! Integers are 64-bit two's-complement with wrapping arithmetic. Arrays have
//! value semantics: assignment and argument passing copy (copy-on-write), so
//! an array variable can be reasoned about as a single scalar location.
//!
//! One step is charged per executed statement and per binary operation;
//! allocating an array of length `n` is charged `n` steps.

mod equiv;

pub use equiv::{equivalent, generate_args, signature, EquivalenceError, Verdict, ARRAY_LEN_RANGE, INT_RANGE};

use std::sync::Arc;

use crate::syntax::{Ast, NodeKind, Type};

pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;
pub const MAX_CALL_DEPTH: usize = 256;

/// `len(a)` returns the length of an array unless the program defines its own `len`.
pub const BUILTIN_LEN: &str = crate::syntax::BUILTIN_NAMES[0];

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    IntArray(Arc<Vec<i64>>),
}

impl Value {
    pub fn array(values: Vec<i64>) -> Self {
        Value::IntArray(Arc::new(values))
    }

    pub fn type_of(&self) -> Type {
        match self {
            Value::Int(_) => Type::Int,
            Value::Bool(_) => Type::Bool,
            Value::IntArray(_) => Type::IntArray,
        }
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::IntArray(a) => write!(f, "{a:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuntimeErrorKind {
    DivByZero,
    IndexOutOfBounds,
    NegativeArraySize,
    UnboundName,
    CallDepthExceeded,
    /// Operand of the wrong type, wrong call arity, or a declaration whose
    /// initializer does not match its declared type.
    TypeMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// `None` for a bare `return;` or falling off the end of the method.
    Returned(Option<Value>),
    RuntimeError(RuntimeErrorKind),
    StepBudgetExceeded,
}

/// Runs `entry` with `args` under a step budget.
pub fn run(program: &Ast, entry: &str, args: &[Value], step_budget: u64) -> Outcome {
    let mut machine = Machine { program, steps_left: step_budget, depth: 0 };
    match machine.call(entry, args.to_vec()) {
        Ok(value) => Outcome::Returned(value),
        Err(Fault::Error(kind)) => Outcome::RuntimeError(kind),
        Err(Fault::Budget) => Outcome::StepBudgetExceeded,
    }
}

enum Fault {
    Error(RuntimeErrorKind),
    Budget,
}

type Exec<T> = Result<T, Fault>;

fn err<T>(kind: RuntimeErrorKind) -> Exec<T> {
    Err(Fault::Error(kind))
}

enum Flow {
    Normal,
    Break,
    Continue,
    Return(Option<Value>),
}

struct Frame {
    scopes: Vec<Vec<(String, Value)>>,
}

impl Frame {
    fn lookup(&self, name: &str) -> Exec<&Value> {
        for scope in self.scopes.iter().rev() {
            if let Some((_, v)) = scope.iter().rev().find(|(n, _)| n == name) {
                return Ok(v);
            }
        }
        err(RuntimeErrorKind::UnboundName)
    }

    fn lookup_mut(&mut self, name: &str) -> Exec<&mut Value> {
        for scope in self.scopes.iter_mut().rev() {
            if let Some((_, v)) = scope.iter_mut().rev().find(|(n, _)| n == name) {
                return Ok(v);
            }
        }
        err(RuntimeErrorKind::UnboundName)
    }

    fn declare(&mut self, name: &str, value: Value) {
        let scope = self.scopes.last_mut().expect("frame has a scope");
        if let Some(slot) = scope.iter_mut().find(|(n, _)| n == name) {
            slot.1 = value;
        } else {
            scope.push((name.to_string(), value));
        }
    }
}

struct Machine<'p> {
    program: &'p Ast,
    steps_left: u64,
    depth: usize,
}

impl<'p> Machine<'p> {
    fn tick(&mut self, amount: u64) -> Exec<()> {
        if self.steps_left < amount {
            self.steps_left = 0;
            return Err(Fault::Budget);
        }
        self.steps_left -= amount;
        Ok(())
    }

    fn call(&mut self, name: &str, args: Vec<Value>) -> Exec<Option<Value>> {
        let Some(method) = self.program.method(name) else {
            if name == BUILTIN_LEN {
                return match args.as_slice() {
                    [Value::IntArray(a)] => Ok(Some(Value::Int(a.len() as i64))),
                    _ => err(RuntimeErrorKind::TypeMismatch),
                };
            }
            return err(RuntimeErrorKind::UnboundName);
        };
        let params = method.params();
        if params.len() != args.len() || params.iter().zip(&args).any(|(p, a)| p.ty != Some(a.type_of())) {
            return err(RuntimeErrorKind::TypeMismatch);
        }
        if self.depth >= MAX_CALL_DEPTH {
            return err(RuntimeErrorKind::CallDepthExceeded);
        }
        self.depth += 1;
        let bindings = params.iter().map(|p| p.token_str().to_string()).zip(args).collect();
        let mut frame = Frame { scopes: vec![bindings] };
        let flow = self.exec(method.body(), &mut frame);
        self.depth -= 1;
        match flow? {
            Flow::Return(value) => Ok(value),
            _ => Ok(None),
        }
    }

    fn exec_all(&mut self, stmts: &'p [Ast], frame: &mut Frame) -> Exec<Flow> {
        for stmt in stmts {
            match self.exec(stmt, frame)? {
                Flow::Normal => {}
                other => return Ok(other),
            }
        }
        Ok(Flow::Normal)
    }

    fn scoped<T>(&mut self, frame: &mut Frame, body: impl FnOnce(&mut Self, &mut Frame) -> Exec<T>) -> Exec<T> {
        frame.scopes.push(Vec::new());
        let result = body(self, frame);
        frame.scopes.pop();
        result
    }

    fn exec(&mut self, stmt: &'p Ast, frame: &mut Frame) -> Exec<Flow> {
        self.tick(1)?;
        match stmt.kind {
            NodeKind::Block => self.scoped(frame, |m, f| m.exec_all(&stmt.children, f)),
            NodeKind::VarDecl => {
                let value = self.eval(&stmt.children[0], frame)?;
                if Some(value.type_of()) != stmt.ty {
                    return err(RuntimeErrorKind::TypeMismatch);
                }
                frame.declare(stmt.token_str(), value);
                Ok(Flow::Normal)
            }
            NodeKind::Assign => {
                self.assign(&stmt.children[0], &stmt.children[1], frame)?;
                Ok(Flow::Normal)
            }
            NodeKind::ExprStmt => {
                let e = &stmt.children[0];
                if e.kind == NodeKind::Call {
                    let args = self.eval_args(e, frame)?;
                    self.call(e.token_str(), args)?;
                } else {
                    self.eval(e, frame)?;
                }
                Ok(Flow::Normal)
            }
            NodeKind::Empty => Ok(Flow::Normal),
            NodeKind::If => {
                if self.eval_bool(&stmt.children[0], frame)? {
                    self.exec(&stmt.children[1], frame)
                } else if let Some(alt) = stmt.children.get(2) {
                    self.exec(alt, frame)
                } else {
                    Ok(Flow::Normal)
                }
            }
            NodeKind::While => loop {
                if !self.eval_bool(&stmt.children[0], frame)? {
                    return Ok(Flow::Normal);
                }
                match self.exec(&stmt.children[1], frame)? {
                    Flow::Break => return Ok(Flow::Normal),
                    Flow::Return(v) => return Ok(Flow::Return(v)),
                    Flow::Normal | Flow::Continue => {}
                }
            },
            NodeKind::For => self.scoped(frame, |m, f| {
                let [init, cond, update, body] = [&stmt.children[0], &stmt.children[1], &stmt.children[2], &stmt.children[3]];
                if init.kind != NodeKind::Empty {
                    m.exec(init, f)?;
                }
                loop {
                    if cond.kind != NodeKind::Empty && !m.eval_bool(cond, f)? {
                        return Ok(Flow::Normal);
                    }
                    match m.exec(body, f)? {
                        Flow::Break => return Ok(Flow::Normal),
                        Flow::Return(v) => return Ok(Flow::Return(v)),
                        Flow::Normal | Flow::Continue => {}
                    }
                    if update.kind != NodeKind::Empty {
                        m.exec(update, f)?;
                    }
                }
            }),
            NodeKind::Switch => {
                let Value::Int(subject) = self.eval(&stmt.children[0], frame)? else {
                    return err(RuntimeErrorKind::TypeMismatch);
                };
                let cases = &stmt.children[1..];
                let matched = cases
                    .iter()
                    .position(|c| c.token.as_deref().and_then(|l| l.parse::<i64>().ok()) == Some(subject))
                    .or_else(|| cases.iter().position(|c| c.token.is_none()));
                let Some(start) = matched else {
                    return Ok(Flow::Normal);
                };
                self.scoped(frame, |m, f| {
                    for case in &cases[start..] {
                        match m.exec_all(&case.children, f)? {
                            Flow::Normal => {}
                            Flow::Break => return Ok(Flow::Normal),
                            other => return Ok(other),
                        }
                    }
                    Ok(Flow::Normal)
                })
            }
            NodeKind::Break => Ok(Flow::Break),
            NodeKind::Continue => Ok(Flow::Continue),
            NodeKind::Return => {
                let value = match stmt.children.first() {
                    Some(e) => Some(self.eval(e, frame)?),
                    None => None,
                };
                Ok(Flow::Return(value))
            }
            k => unreachable!("{k:?} is not a statement"),
        }
    }

    fn assign(&mut self, target: &'p Ast, value: &'p Ast, frame: &mut Frame) -> Exec<()> {
        match target.kind {
            NodeKind::Ident => {
                let v = self.eval(value, frame)?;
                let slot = frame.lookup_mut(target.token_str())?;
                if slot.type_of() != v.type_of() {
                    return err(RuntimeErrorKind::TypeMismatch);
                }
                *slot = v;
                Ok(())
            }
            NodeKind::Index => {
                let base = &target.children[0];
                if base.kind != NodeKind::Ident {
                    // Writing into a temporary array has no observable effect.
                    self.eval(base, frame)?;
                    self.eval_int(&target.children[1], frame)?;
                    self.eval_int(value, frame)?;
                    return Ok(());
                }
                frame.lookup(base.token_str())?;
                let index = self.eval_int(&target.children[1], frame)?;
                let v = self.eval_int(value, frame)?;
                let Value::IntArray(array) = frame.lookup_mut(base.token_str())? else {
                    return err(RuntimeErrorKind::TypeMismatch);
                };
                if index < 0 || index as usize >= array.len() {
                    return err(RuntimeErrorKind::IndexOutOfBounds);
                }
                Arc::make_mut(array)[index as usize] = v;
                Ok(())
            }
            _ => err(RuntimeErrorKind::TypeMismatch),
        }
    }

    fn eval_int(&mut self, e: &'p Ast, frame: &mut Frame) -> Exec<i64> {
        match self.eval(e, frame)? {
            Value::Int(v) => Ok(v),
            _ => err(RuntimeErrorKind::TypeMismatch),
        }
    }

    fn eval_bool(&mut self, e: &'p Ast, frame: &mut Frame) -> Exec<bool> {
        match self.eval(e, frame)? {
            Value::Bool(b) => Ok(b),
            _ => err(RuntimeErrorKind::TypeMismatch),
        }
    }

    fn eval(&mut self, e: &'p Ast, frame: &mut Frame) -> Exec<Value> {
        match e.kind {
            NodeKind::IntLit => match e.token_str().parse::<i64>() {
                Ok(v) => Ok(Value::Int(v)),
                Err(_) => err(RuntimeErrorKind::TypeMismatch),
            },
            NodeKind::BoolLit => Ok(Value::Bool(e.token_str() == "true")),
            NodeKind::Ident => frame.lookup(e.token_str()).cloned(),
            NodeKind::Unary => match (e.token_str(), self.eval(&e.children[0], frame)?) {
                ("-", Value::Int(v)) => Ok(Value::Int(v.wrapping_neg())),
                ("!", Value::Bool(b)) => Ok(Value::Bool(!b)),
                _ => err(RuntimeErrorKind::TypeMismatch),
            },
            NodeKind::Binary => self.binary(e, frame),
            NodeKind::Index => {
                let base = &e.children[0];
                if base.kind == NodeKind::Ident {
                    frame.lookup(base.token_str())?;
                    let index = self.eval_int(&e.children[1], frame)?;
                    match frame.lookup(base.token_str())? {
                        Value::IntArray(array) => element(array, index),
                        _ => err(RuntimeErrorKind::TypeMismatch),
                    }
                } else {
                    let Value::IntArray(array) = self.eval(base, frame)? else {
                        return err(RuntimeErrorKind::TypeMismatch);
                    };
                    let index = self.eval_int(&e.children[1], frame)?;
                    element(&array, index)
                }
            }
            NodeKind::NewArray => {
                let len = self.eval_int(&e.children[0], frame)?;
                if len < 0 {
                    return err(RuntimeErrorKind::NegativeArraySize);
                }
                self.tick(len as u64)?;
                Ok(Value::array(vec![0; len as usize]))
            }
            NodeKind::Call => {
                let args = self.eval_args(e, frame)?;
                match self.call(e.token_str(), args)? {
                    Some(v) => Ok(v),
                    None => err(RuntimeErrorKind::TypeMismatch),
                }
            }
            k => unreachable!("{k:?} is not an expression"),
        }
    }

    fn eval_args(&mut self, call: &'p Ast, frame: &mut Frame) -> Exec<Vec<Value>> {
        let mut args = Vec::with_capacity(call.children.len());
        for arg in &call.children {
            args.push(self.eval(arg, frame)?);
        }
        Ok(args)
    }

    fn binary(&mut self, e: &'p Ast, frame: &mut Frame) -> Exec<Value> {
        self.tick(1)?;
        let op = e.token_str();
        if op == "&&" || op == "||" {
            let lhs = self.eval_bool(&e.children[0], frame)?;
            if (op == "&&") != lhs {
                return Ok(Value::Bool(lhs));
            }
            return Ok(Value::Bool(self.eval_bool(&e.children[1], frame)?));
        }
        let lhs = self.eval(&e.children[0], frame)?;
        let rhs = self.eval(&e.children[1], frame)?;
        use RuntimeErrorKind::*;
        let value = match (lhs, rhs) {
            (Value::Int(a), Value::Int(b)) => match op {
                "+" => Value::Int(a.wrapping_add(b)),
                "-" => Value::Int(a.wrapping_sub(b)),
                "*" => Value::Int(a.wrapping_mul(b)),
                "/" if b == 0 => return err(DivByZero),
                "/" => Value::Int(a.wrapping_div(b)),
                "%" if b == 0 => return err(DivByZero),
                "%" => Value::Int(a.wrapping_rem(b)),
                "<" => Value::Bool(a < b),
                "<=" => Value::Bool(a <= b),
                ">" => Value::Bool(a > b),
                ">=" => Value::Bool(a >= b),
                "==" => Value::Bool(a == b),
                "!=" => Value::Bool(a != b),
                _ => return err(TypeMismatch),
            },
            (Value::Bool(a), Value::Bool(b)) => match op {
                "==" => Value::Bool(a == b),
                "!=" => Value::Bool(a != b),
                _ => return err(TypeMismatch),
            },
            _ => return err(TypeMismatch),
        };
        Ok(value)
    }
}

fn element(array: &[i64], index: i64) -> Exec<Value> {
    if index < 0 || index as usize >= array.len() {
        return err(RuntimeErrorKind::IndexOutOfBounds);
    }
    Ok(Value::Int(array[index as usize]))
}
