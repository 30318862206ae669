use std::collections::BTreeSet;

use super::names::{program_names, NamePool};
use super::{find_paths, replace_at, OperatorTag, TransformError};
use crate::numerics::Pcg32;
use crate::syntax::{Ast, NodeKind, Type};

/// Consecutive cases sharing one body: leading empty cases join the next nonempty one.
struct Group<'a> {
    labels: Vec<i64>,
    has_default: bool,
    body: &'a [Ast],
}

fn groups(switch: &Ast) -> Vec<Group<'_>> {
    let mut out = Vec::new();
    let mut labels = Vec::new();
    let mut has_default = false;
    for case in &switch.children[1..] {
        match &case.token {
            Some(l) => labels.push(l.parse::<i64>().expect("parser checks labels")),
            None => has_default = true,
        }
        if !case.children.is_empty() {
            out.push(Group { labels: std::mem::take(&mut labels), has_default, body: &case.children });
            has_default = false;
        }
    }
    if !labels.is_empty() || has_default {
        out.push(Group { labels, has_default, body: &[] });
    }
    out
}

/// Whether a `break` bound to the enclosing switch occurs in `stmts`.
fn has_switch_break(stmts: &[Ast]) -> bool {
    stmts.iter().any(|s| match s.kind {
        NodeKind::Break => true,
        NodeKind::While | NodeKind::For | NodeKind::Switch => false,
        _ => has_switch_break(&s.children),
    })
}

fn is_eligible(switch: &Ast) -> bool {
    let cases = &switch.children[1..];
    let mut labels = BTreeSet::new();
    for case in cases {
        if let Some(l) = &case.token {
            if !labels.insert(l.as_str()) {
                return false;
            }
        }
    }
    let groups = groups(switch);
    let last_nonempty = groups.iter().rposition(|g| !g.body.is_empty());
    groups.iter().enumerate().all(|(i, g)| {
        let Some((tail, front)) = g.body.split_last() else {
            return true;
        };
        let terminated = matches!(tail.kind, NodeKind::Break | NodeKind::Return);
        (terminated || Some(i) == last_nonempty) && !has_switch_break(front) && (tail.kind == NodeKind::Break || !has_switch_break(std::slice::from_ref(tail)))
    })
}

/// Paths of every switch without fallthrough between nonempty cases.
pub fn sf_candidates(tree: &Ast) -> Vec<Vec<usize>> {
    find_paths(tree, &|n| n.kind == NodeKind::Switch && is_eligible(n))
}

/// Rewrites one seeded-random eligible switch into
/// `{ int t = subject; if (t == c1) {..} else if .. else {..} }`.
pub fn apply_sf(tree: &Ast, seed: u64, pool: &NamePool) -> Result<Ast, TransformError> {
    let candidates = sf_candidates(tree);
    let mut rng = Pcg32::seeded(seed);
    let path = rng.choose(&candidates).ok_or(TransformError::NotApplicable(OperatorTag::SF))?;
    let switch = tree.at_path(path).expect("candidate path");
    let tmp = pool.fresh(&program_names(tree), &mut rng);

    let groups = groups(switch);
    let default = groups.iter().find(|g| g.has_default);
    let arm_body = |g: &Group| {
        let mut stmts = g.body.to_vec();
        if stmts.last().is_some_and(|s| s.kind == NodeKind::Break) {
            stmts.pop();
        }
        Ast::block(stmts)
    };
    // Without a default, trailing empty groups do nothing and are dropped.
    let labelled: Vec<&Group> = groups.iter().filter(|g| !g.has_default).collect();
    let keep = if default.is_some() {
        labelled.len()
    } else {
        labelled.iter().rposition(|g| !g.body.is_empty()).map_or(0, |i| i + 1)
    };
    let mut chain: Option<Ast> = default.map(arm_body);
    for g in labelled[..keep].iter().rev() {
        let cond = g
            .labels
            .iter()
            .map(|&l| Ast::binary("==", Ast::ident(&tmp), Ast::int_lit(l)))
            .reduce(|a, b| Ast::binary("||", a, b))
            .expect("group has a label");
        let mut children = vec![cond, arm_body(g)];
        children.extend(chain.take());
        chain = Some(Ast::new(NodeKind::If, None, children));
    }
    let mut stmts = vec![Ast::var_decl(&tmp, Type::Int, switch.children[0].clone())];
    match chain {
        Some(c) if c.kind == NodeKind::If => stmts.push(c),
        // Only a default: its body runs unconditionally.
        Some(c) => stmts.extend(c.children),
        None => {}
    }
    Ok(replace_at(tree, path, Ast::block(stmts)))
}
