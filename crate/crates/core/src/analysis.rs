//! Def-use sets, block enumeration and the adjacent-swap independence relation.

use std::collections::{BTreeSet, HashMap};

use crate::syntax::{Ast, NodeKind};

/// Variables written and read by one statement subtree.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StmtInfo {
    pub defs: BTreeSet<String>,
    pub uses: BTreeSet<String>,
    /// Subtree contains a Call, Return, Break or Continue.
    pub effects: bool,
    /// Subtree can raise a runtime error: division, remainder, indexing,
    /// array allocation or a call.
    pub may_trap: bool,
}

/// Def-use information for every statement of a tree, keyed by node id.
#[derive(Debug, Clone, Default)]
pub struct DefUse {
    by_id: HashMap<u32, StmtInfo>,
}

impl DefUse {
    pub fn get(&self, id: u32) -> Option<&StmtInfo> {
        self.by_id.get(&id)
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }
}

/// Computes def-use sets for every statement node. Node ids must be unique.
pub fn def_use(tree: &Ast) -> DefUse {
    let mut by_id = HashMap::new();
    for node in tree.preorder() {
        if node.kind.is_statement() {
            by_id.insert(node.id, stmt_info(node));
        }
    }
    DefUse { by_id }
}

/// Def-use information for a single statement subtree.
pub fn stmt_info(stmt: &Ast) -> StmtInfo {
    let mut info = StmtInfo::default();
    collect(stmt, &mut info);
    info
}

fn collect(node: &Ast, info: &mut StmtInfo) {
    match node.kind {
        NodeKind::VarDecl => {
            info.defs.insert(node.token_str().to_string());
            collect(&node.children[0], info);
        }
        NodeKind::Assign => {
            let target = &node.children[0];
            if target.kind == NodeKind::Ident {
                info.defs.insert(target.token_str().to_string());
            } else {
                // a[i] = e: the whole array is both read and written.
                let root = array_root(target);
                if let Some(name) = root {
                    info.defs.insert(name.to_string());
                }
                collect(target, info);
            }
            collect(&node.children[1], info);
        }
        NodeKind::Ident => {
            info.uses.insert(node.token_str().to_string());
        }
        NodeKind::Call => {
            info.effects = true;
            info.may_trap = true;
            node.children.iter().for_each(|c| collect(c, info));
        }
        NodeKind::Return | NodeKind::Break | NodeKind::Continue => {
            info.effects = true;
            node.children.iter().for_each(|c| collect(c, info));
        }
        NodeKind::Binary => {
            if matches!(node.token_str(), "/" | "%") {
                info.may_trap = true;
            }
            node.children.iter().for_each(|c| collect(c, info));
        }
        NodeKind::Index | NodeKind::NewArray => {
            info.may_trap = true;
            node.children.iter().for_each(|c| collect(c, info));
        }
        _ => node.children.iter().for_each(|c| collect(c, info)),
    }
}

fn array_root(lvalue: &Ast) -> Option<&str> {
    match lvalue.kind {
        NodeKind::Ident => Some(lvalue.token_str()),
        NodeKind::Index => array_root(&lvalue.children[0]),
        _ => None,
    }
}

/// A Block node located by its child-index path from the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockRef {
    pub path: Vec<usize>,
    pub stmt_ids: Vec<u32>,
}

/// Every Block node in preorder.
pub fn blocks(tree: &Ast) -> Vec<BlockRef> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    walk_blocks(tree, &mut path, &mut out);
    out
}

fn walk_blocks(node: &Ast, path: &mut Vec<usize>, out: &mut Vec<BlockRef>) {
    if node.kind == NodeKind::Block {
        out.push(BlockRef { path: path.clone(), stmt_ids: node.children.iter().map(|c| c.id).collect() });
    }
    for (i, child) in node.children.iter().enumerate() {
        path.push(i);
        walk_blocks(child, path, out);
        path.pop();
    }
}

/// Statements `index` and `index + 1` of the block at `block_path` may be exchanged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapPair {
    pub block_path: Vec<usize>,
    pub index: usize,
}

fn is_simple(stmt: &Ast) -> bool {
    matches!(stmt.kind, NodeKind::VarDecl | NodeKind::Assign | NodeKind::ExprStmt)
}

fn disjoint(a: &BTreeSet<String>, b: &BTreeSet<String>) -> bool {
    a.intersection(b).next().is_none()
}

/// Whether adjacent statements `first` and `second` commute.
pub fn can_swap(first: &Ast, second: &Ast) -> bool {
    if !is_simple(first) || !is_simple(second) {
        return false;
    }
    let s = stmt_info(first);
    let t = stmt_info(second);
    if s.effects || t.effects || (s.may_trap && t.may_trap) {
        return false;
    }
    if !disjoint(&s.defs, &t.uses) || !disjoint(&s.uses, &t.defs) || !disjoint(&s.defs, &t.defs) {
        return false;
    }
    true
}

/// All adjacent statement pairs that can be transposed without changing behaviour.
pub fn swappable_pairs(tree: &Ast) -> Vec<SwapPair> {
    let mut out = Vec::new();
    for block in blocks(tree) {
        let node = tree.at_path(&block.path).expect("block path resolves");
        let stmts = &node.children;
        for i in 0..stmts.len().saturating_sub(1) {
            if can_swap(&stmts[i], &stmts[i + 1]) {
                out.push(SwapPair { block_path: block.path.clone(), index: i });
            }
        }
    }
    out
}
