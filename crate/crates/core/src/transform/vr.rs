use std::collections::{BTreeMap, BTreeSet};

use super::names::{program_names, NamePool};
use super::{OperatorTag, TransformError};
use crate::numerics::Pcg32;
use crate::syntax::{Ast, NodeKind};

/// `(method index, name)` for every distinct local or parameter name.
pub fn renamable_names(tree: &Ast) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    for (mi, method) in tree.children.iter().enumerate() {
        let names: BTreeSet<&str> = method
            .preorder()
            .filter(|n| matches!(n.kind, NodeKind::Param | NodeKind::VarDecl))
            .map(|n| n.token_str())
            .collect();
        out.extend(names.into_iter().map(|n| (mi, n.to_string())));
    }
    out
}

/// Renames each local/parameter with probability 1/2 (at least one) to a
/// pool name absent from the whole program. All bindings of a name inside a
/// method are renamed together, so the result is alpha-equivalent.
pub fn apply_vr(tree: &Ast, seed: u64, pool: &NamePool) -> Result<Ast, TransformError> {
    let candidates = renamable_names(tree);
    if candidates.is_empty() {
        return Err(TransformError::NotApplicable(OperatorTag::VR));
    }
    let mut rng = Pcg32::seeded(seed);
    let mut chosen: Vec<bool> = candidates.iter().map(|_| rng.coin()).collect();
    if !chosen.iter().any(|&c| c) {
        let forced = rng.index(candidates.len());
        chosen[forced] = true;
    }
    let mut taken = program_names(tree);
    let mut renames: BTreeMap<usize, BTreeMap<String, String>> = BTreeMap::new();
    for ((method, old), pick) in candidates.iter().zip(chosen) {
        if !pick {
            continue;
        }
        let new = pool.fresh(&taken, &mut rng);
        taken.insert(new.clone());
        renames.entry(*method).or_default().insert(old.clone(), new);
    }
    let mut out = tree.clone();
    for (mi, map) in renames {
        rename_in(&mut out.children[mi], &map);
    }
    out.renumber();
    Ok(out)
}

fn rename_in(node: &mut Ast, map: &BTreeMap<String, String>) {
    if matches!(node.kind, NodeKind::Ident | NodeKind::Param | NodeKind::VarDecl) {
        if let Some(new) = node.token.as_ref().and_then(|t| map.get(t)) {
            node.token = Some(new.clone());
        }
    }
    for child in &mut node.children {
        rename_in(child, map);
    }
}
