//! Semantic-preserving rewrite operators and the two-view sampler.
//!
//! | tag | rewrite                                                    |
//! |-----|------------------------------------------------------------|
//! | VR  | consistent capture-free renaming of locals and parameters  |
//! | US  | insertion of unused statements drawn from a template pool  |
//! | PS  | transposition of one adjacent independent statement pair   |
//! | LX  | `for` ⇄ `while` exchange                                   |
//! | SF  | fallthrough-free `switch` to an `if`/`else if` chain       |
//!
//! Every `apply_*` is a pure function of `(tree, seed)` and returns a
//! renumbered tree.

mod lx;
mod names;
mod ps;
mod sample;
mod sf;
mod us;
mod vr;

pub use lx::{apply_lx, lx_candidates};
pub use names::{is_valid_name, program_names, NamePool};
pub use ps::apply_ps;
pub use sample::{sample_views, view_seed, TransformedView};
pub use sf::{apply_sf, sf_candidates};
pub use us::{apply_us, dead_code_templates, TEMPLATE_COUNT};
pub use vr::{apply_vr, renamable_names};

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::swappable_pairs;
use crate::syntax::{Ast, NodeKind, Type};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OperatorTag {
    VR,
    US,
    PS,
    LX,
    SF,
}

impl OperatorTag {
    pub const ALL: [OperatorTag; 5] = [OperatorTag::VR, OperatorTag::US, OperatorTag::PS, OperatorTag::LX, OperatorTag::SF];

    pub fn as_str(self) -> &'static str {
        match self {
            OperatorTag::VR => "VR",
            OperatorTag::US => "US",
            OperatorTag::PS => "PS",
            OperatorTag::LX => "LX",
            OperatorTag::SF => "SF",
        }
    }

    /// Bit used when an operator set is stored as a mask.
    pub fn bit(self) -> u32 {
        1 << (self as u32)
    }

    pub fn set_to_mask(ops: &BTreeSet<OperatorTag>) -> u32 {
        ops.iter().fold(0, |m, op| m | op.bit())
    }

    pub fn set_from_mask(mask: u32) -> BTreeSet<OperatorTag> {
        OperatorTag::ALL.into_iter().filter(|op| mask & op.bit() != 0).collect()
    }

    /// Parses a comma-separated list such as `VR,PS`.
    pub fn parse_list(text: &str) -> Result<BTreeSet<OperatorTag>, TransformError> {
        text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect()
    }

    pub fn all() -> BTreeSet<OperatorTag> {
        OperatorTag::ALL.into_iter().collect()
    }
}

impl fmt::Display for OperatorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatorTag {
    type Err = TransformError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "VR" => Ok(OperatorTag::VR),
            "US" => Ok(OperatorTag::US),
            "PS" => Ok(OperatorTag::PS),
            "LX" => Ok(OperatorTag::LX),
            "SF" => Ok(OperatorTag::SF),
            _ => Err(TransformError::UnknownOperator(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("operator {0} is not applicable to this tree")]
    NotApplicable(OperatorTag),
    #[error("no operator from the requested set is applicable")]
    NoApplicableOperator,
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
}

/// Operators that can rewrite `tree`.
pub fn applicable(tree: &Ast) -> BTreeSet<OperatorTag> {
    let mut ops = BTreeSet::new();
    if !renamable_names(tree).is_empty() {
        ops.insert(OperatorTag::VR);
    }
    if tree.preorder().any(|n| n.kind == NodeKind::Block) {
        ops.insert(OperatorTag::US);
    }
    if !swappable_pairs(tree).is_empty() {
        ops.insert(OperatorTag::PS);
    }
    if !lx_candidates(tree).is_empty() {
        ops.insert(OperatorTag::LX);
    }
    if !sf_candidates(tree).is_empty() {
        ops.insert(OperatorTag::SF);
    }
    ops
}

/// Dispatches to the operator's `apply_*` function.
pub fn apply(op: OperatorTag, tree: &Ast, seed: u64, pool: &NamePool) -> Result<Ast, TransformError> {
    match op {
        OperatorTag::VR => apply_vr(tree, seed, pool),
        OperatorTag::US => Ok(apply_us(tree, seed, pool)),
        OperatorTag::PS => apply_ps(tree, seed),
        OperatorTag::LX => apply_lx(tree, seed),
        OperatorTag::SF => apply_sf(tree, seed, pool),
    }
}

/// Scalar variables visible and initialized in front of child `position` of
/// the block at `block_path`, innermost binding last.
pub(crate) fn scalars_in_scope(tree: &Ast, block_path: &[usize], position: usize) -> Vec<(String, Type)> {
    let mut visible: Vec<(String, Type)> = Vec::new();
    let bind = |name: &str, ty: Type, visible: &mut Vec<(String, Type)>| {
        visible.retain(|(n, _)| n != name);
        visible.push((name.to_string(), ty));
    };
    let mut node = tree;
    let mut depth = 0;
    loop {
        let next = if depth < block_path.len() { Some(block_path[depth]) } else { None };
        match node.kind {
            NodeKind::Method => {
                for p in node.params() {
                    bind(p.token_str(), p.ty.expect("typed"), &mut visible);
                }
            }
            NodeKind::Block | NodeKind::Case => {
                let upto = next.unwrap_or(position).min(node.children.len());
                for stmt in &node.children[..upto] {
                    if stmt.kind == NodeKind::VarDecl {
                        bind(stmt.token_str(), stmt.ty.expect("typed"), &mut visible);
                    }
                }
            }
            NodeKind::For if next == Some(3) => {
                let init = &node.children[0];
                if init.kind == NodeKind::VarDecl {
                    bind(init.token_str(), init.ty.expect("typed"), &mut visible);
                }
            }
            _ => {}
        }
        match next {
            Some(i) => {
                node = &node.children[i];
                depth += 1;
            }
            None => break,
        }
    }
    visible.retain(|(_, ty)| *ty != Type::IntArray);
    visible
}

/// Replaces the statement at `path` with `replacement` and renumbers.
pub(crate) fn replace_at(tree: &Ast, path: &[usize], replacement: Ast) -> Ast {
    let mut out = tree.clone();
    *out.at_path_mut(path).expect("path resolves") = replacement;
    out.renumber();
    out
}

/// Paths of all nodes satisfying `pred`, in preorder.
pub(crate) fn find_paths(tree: &Ast, pred: &dyn Fn(&Ast) -> bool) -> Vec<Vec<usize>> {
    fn walk(node: &Ast, path: &mut Vec<usize>, pred: &dyn Fn(&Ast) -> bool, out: &mut Vec<Vec<usize>>) {
        if pred(node) {
            out.push(path.clone());
        }
        for (i, c) in node.children.iter().enumerate() {
            path.push(i);
            walk(c, path, pred, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    walk(tree, &mut Vec::new(), pred, &mut out);
    out
}
