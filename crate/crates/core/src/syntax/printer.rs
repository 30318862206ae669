//! Canonical pretty-printer.
//!
//! Output format: one statement per line, two spaces of indentation per
//! nesting level, methods separated by a blank line, minimal parentheses.

use super::ast::{Ast, NodeKind};

const INDENT: &str = "  ";

/// Renders a program (or any statement/expression subtree) as MJ text.
pub fn print(tree: &Ast) -> String {
    let mut out = String::new();
    match tree.kind {
        NodeKind::Program => {
            for (i, method) in tree.children.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                print_method(method, &mut out);
            }
        }
        NodeKind::Method => print_method(tree, &mut out),
        k if k.is_expression() => out.push_str(&expr(tree)),
        _ => print_stmt(tree, 0, &mut out),
    }
    out
}

fn print_method(method: &Ast, out: &mut String) {
    let params: Vec<String> = method
        .params()
        .iter()
        .map(|p| format!("{} {}", p.ty.expect("typed param"), p.token_str()))
        .collect();
    out.push_str(&format!(
        "{} {}({}) ",
        method.ty.expect("typed method"),
        method.token_str(),
        params.join(", ")
    ));
    print_block_inline(method.body(), 0, out);
    out.push('\n');
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
}

/// Writes `{ ... }` starting at the current column, without trailing newline.
fn print_block_inline(block: &Ast, depth: usize, out: &mut String) {
    out.push_str("{\n");
    for stmt in &block.children {
        print_stmt(stmt, depth + 1, out);
    }
    indent(out, depth);
    out.push('}');
}

/// Statement text without indentation or `;`, for simple statements and for-header slots.
fn simple(stmt: &Ast) -> String {
    match stmt.kind {
        NodeKind::VarDecl => format!("{} {} = {}", stmt.ty.expect("typed decl"), stmt.token_str(), expr(&stmt.children[0])),
        NodeKind::Assign => format!("{} = {}", expr(&stmt.children[0]), expr(&stmt.children[1])),
        NodeKind::ExprStmt => expr(&stmt.children[0]),
        NodeKind::Empty => String::new(),
        k => unreachable!("{k:?} is not a simple statement"),
    }
}

fn print_stmt(stmt: &Ast, depth: usize, out: &mut String) {
    indent(out, depth);
    match stmt.kind {
        NodeKind::Block => {
            print_block_inline(stmt, depth, out);
            out.push('\n');
        }
        NodeKind::VarDecl | NodeKind::Assign | NodeKind::ExprStmt => {
            out.push_str(&simple(stmt));
            out.push_str(";\n");
        }
        NodeKind::If => {
            print_if(stmt, depth, out);
            out.push('\n');
        }
        NodeKind::While => {
            out.push_str(&format!("while ({}) ", expr(&stmt.children[0])));
            print_block_inline(&stmt.children[1], depth, out);
            out.push('\n');
        }
        NodeKind::For => {
            let cond = &stmt.children[1];
            let cond = if cond.kind == NodeKind::Empty { String::new() } else { expr(cond) };
            let init = simple(&stmt.children[0]);
            let update = simple(&stmt.children[2]);
            let header = match (cond.is_empty(), update.is_empty()) {
                (true, true) => format!("for ({init};;) "),
                (false, true) => format!("for ({init}; {cond};) "),
                (true, false) => format!("for ({init};; {update}) "),
                (false, false) => format!("for ({init}; {cond}; {update}) "),
            };
            out.push_str(&header);
            print_block_inline(&stmt.children[3], depth, out);
            out.push('\n');
        }
        NodeKind::Switch => {
            out.push_str(&format!("switch ({}) {{\n", expr(&stmt.children[0])));
            for case in &stmt.children[1..] {
                indent(out, depth + 1);
                match &case.token {
                    Some(label) => out.push_str(&format!("case {label}:\n")),
                    None => out.push_str("default:\n"),
                }
                for s in &case.children {
                    print_stmt(s, depth + 2, out);
                }
            }
            indent(out, depth);
            out.push_str("}\n");
        }
        NodeKind::Break => out.push_str("break;\n"),
        NodeKind::Continue => out.push_str("continue;\n"),
        NodeKind::Return => match stmt.children.first() {
            Some(value) => out.push_str(&format!("return {};\n", expr(value))),
            None => out.push_str("return;\n"),
        },
        NodeKind::Empty => out.push_str(";\n"),
        k => unreachable!("{k:?} is not a statement"),
    }
}

fn print_if(stmt: &Ast, depth: usize, out: &mut String) {
    out.push_str(&format!("if ({}) ", expr(&stmt.children[0])));
    print_block_inline(&stmt.children[1], depth, out);
    if let Some(alt) = stmt.children.get(2) {
        out.push_str(" else ");
        if alt.kind == NodeKind::If {
            print_if(alt, depth, out);
        } else {
            print_block_inline(alt, depth, out);
        }
    }
}

fn precedence(node: &Ast) -> u8 {
    match node.kind {
        NodeKind::Binary => match node.token_str() {
            "||" => 1,
            "&&" => 2,
            "==" | "!=" => 3,
            "<" | "<=" | ">" | ">=" => 4,
            "+" | "-" => 5,
            _ => 6,
        },
        NodeKind::Unary => 7,
        NodeKind::NewArray => 7,
        _ => 8,
    }
}

fn wrap(node: &Ast, needs_parens: bool) -> String {
    if needs_parens {
        format!("({})", expr(node))
    } else {
        expr(node)
    }
}

/// Renders an expression with the minimal parentheses needed to re-parse to the same tree.
pub fn expr(node: &Ast) -> String {
    match node.kind {
        NodeKind::Ident | NodeKind::IntLit | NodeKind::BoolLit => node.token_str().to_string(),
        NodeKind::Binary => {
            let p = precedence(node);
            let lhs = &node.children[0];
            let rhs = &node.children[1];
            format!(
                "{} {} {}",
                wrap(lhs, precedence(lhs) < p),
                node.token_str(),
                wrap(rhs, precedence(rhs) <= p)
            )
        }
        NodeKind::Unary => {
            let operand = &node.children[0];
            format!("{}{}", node.token_str(), wrap(operand, precedence(operand) < 7))
        }
        NodeKind::Call => {
            let args: Vec<String> = node.children.iter().map(expr).collect();
            format!("{}({})", node.token_str(), args.join(", "))
        }
        NodeKind::Index => {
            let base = &node.children[0];
            format!("{}[{}]", wrap(base, precedence(base) < 8), expr(&node.children[1]))
        }
        NodeKind::NewArray => format!("new int[{}]", expr(&node.children[0])),
        k => unreachable!("{k:?} is not an expression"),
    }
}
