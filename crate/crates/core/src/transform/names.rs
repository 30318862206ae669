use std::collections::{BTreeSet, HashSet};

use crate::numerics::Pcg32;
use crate::syntax::{is_keyword, Ast, NodeKind, BUILTIN_NAMES};

const COMMON_NAMES: &[&str] = &[
    "count", "total", "sum", "acc", "result", "value", "item", "index", "idx", "pos", "left", "right", "lo",
    "hi", "mid", "tmp", "temp", "cur", "prev", "next", "flag", "found", "limit", "bound", "step", "num", "val",
    "best", "worst", "small", "large", "first", "last", "head", "tail", "width", "height", "size", "len2",
    "offset", "delta", "diff", "carry", "digit", "base", "exp", "power", "factor", "ratio", "score", "mark",
    "key", "target", "needle", "counter", "runner", "walker", "cursor", "slot", "bucket", "level", "depth",
];

/// Identifier vocabulary for renaming and fresh-name generation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamePool {
    names: Vec<String>,
}

impl Default for NamePool {
    fn default() -> Self {
        let mut names: Vec<String> = COMMON_NAMES.iter().map(|s| s.to_string()).collect();
        names.extend((0..64).map(|k| format!("v{k}")));
        NamePool { names }
    }
}

impl NamePool {
    pub fn new(names: impl IntoIterator<Item = String>) -> Self {
        let set: BTreeSet<String> = names.into_iter().filter(|n| is_valid_name(n)).collect();
        NamePool { names: set.into_iter().collect() }
    }

    /// The default vocabulary plus every local and parameter name in `trees`.
    pub fn harvest<'a>(trees: impl IntoIterator<Item = &'a Ast>) -> Self {
        let mut names: BTreeSet<String> = NamePool::default().names.into_iter().collect();
        for tree in trees {
            for node in tree.preorder() {
                if matches!(node.kind, NodeKind::VarDecl | NodeKind::Param) {
                    names.insert(node.token_str().to_string());
                }
            }
        }
        NamePool::new(names)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// A random pool name not in `taken`; falls back to `v<k>` when the pool is exhausted.
    pub fn fresh(&self, taken: &HashSet<String>, rng: &mut Pcg32) -> String {
        let available: Vec<&String> = self.names.iter().filter(|n| !taken.contains(*n)).collect();
        if let Some(name) = rng.choose(&available) {
            return (*name).clone();
        }
        (0..).map(|k| format!("v{k}")).find(|n| !taken.contains(n)).expect("unbounded")
    }
}

pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !is_keyword(name)
        && !BUILTIN_NAMES.contains(&name)
}

/// Every identifier appearing anywhere in the tree (variables, parameters,
/// methods and callees) plus the builtins.
pub fn program_names(tree: &Ast) -> HashSet<String> {
    let mut names: HashSet<String> = BUILTIN_NAMES.iter().map(|s| s.to_string()).collect();
    for node in tree.preorder() {
        if matches!(node.kind, NodeKind::Ident | NodeKind::VarDecl | NodeKind::Param | NodeKind::Method | NodeKind::Call) {
            names.insert(node.token_str().to_string());
        }
    }
    names
}
