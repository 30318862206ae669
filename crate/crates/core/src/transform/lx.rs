use std::collections::BTreeSet;

use super::{find_paths, replace_at, OperatorTag, TransformError};
use crate::numerics::Pcg32;
use crate::syntax::{Ast, NodeKind};

/// Whether `body` contains a `continue` that would bind to the enclosing loop.
fn has_bound_continue(body: &Ast) -> bool {
    body.children.iter().any(|c| match c.kind {
        NodeKind::Continue => true,
        NodeKind::While | NodeKind::For => false,
        _ => has_bound_continue(c),
    })
}

/// Paths of every loop LX may rewrite: `while` loops and `continue`-free `for` loops.
pub fn lx_candidates(tree: &Ast) -> Vec<Vec<usize>> {
    find_paths(tree, &|n| match n.kind {
        NodeKind::While => true,
        NodeKind::For => !has_bound_continue(&n.children[3]),
        _ => false,
    })
}

/// Exchanges one seeded-random eligible loop:
/// `for(init; c; u) b` becomes `{ init; while (c) { b; u; } }` and
/// `while (c) b` becomes `for (; c;) b`.
pub fn apply_lx(tree: &Ast, seed: u64) -> Result<Ast, TransformError> {
    let candidates = lx_candidates(tree);
    let mut rng = Pcg32::seeded(seed);
    let path = rng.choose(&candidates).ok_or(TransformError::NotApplicable(OperatorTag::LX))?;
    let node = tree.at_path(path).expect("candidate path");
    let replacement = match node.kind {
        NodeKind::While => Ast::new(
            NodeKind::For,
            None,
            vec![Ast::leaf(NodeKind::Empty), node.children[0].clone(), Ast::leaf(NodeKind::Empty), node.children[1].clone()],
        ),
        _ => for_to_while(node),
    };
    Ok(replace_at(tree, path, replacement))
}

fn for_to_while(node: &Ast) -> Ast {
    let [init, cond, update, body] = [&node.children[0], &node.children[1], &node.children[2], &node.children[3]];
    let cond = if cond.kind == NodeKind::Empty { Ast::bool_lit(true) } else { cond.clone() };
    let new_body = if update.kind == NodeKind::Empty {
        body.clone()
    } else {
        // Inline the body unless one of its top-level declarations would
        // shadow a name the update reads or writes.
        let body_decls: BTreeSet<&str> =
            body.children.iter().filter(|s| s.kind == NodeKind::VarDecl).map(|s| s.token_str()).collect();
        let update_names: BTreeSet<&str> =
            update.preorder().filter(|n| n.kind == NodeKind::Ident).map(|n| n.token_str()).collect();
        if body_decls.is_disjoint(&update_names) {
            let mut stmts = body.children.clone();
            stmts.push(update.clone());
            Ast::block(stmts)
        } else {
            Ast::block(vec![body.clone(), update.clone()])
        }
    };
    let while_loop = Ast::new(NodeKind::While, None, vec![cond, new_body]);
    if init.kind == NodeKind::Empty {
        while_loop
    } else {
        Ast::block(vec![init.clone(), while_loop])
    }
}
