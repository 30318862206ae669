use super::names::{program_names, NamePool};
use super::scalars_in_scope;
use crate::analysis::blocks;
use crate::numerics::Pcg32;
use crate::syntax::{Ast, NodeKind, Type};

pub const TEMPLATE_COUNT: usize = 8;

/// Instantiates template `index` with fresh names `a`, `b`, the optional
/// in-scope int scalar `x`, bool scalar `c` and small constants `k1`, `k2`.
fn instantiate(index: usize, a: &str, b: &str, x: Option<&str>, c: Option<&str>, k1: i64, k2: i64) -> Vec<Ast> {
    let int_src = || x.map_or_else(|| Ast::int_lit(k2), Ast::ident);
    let bool_src = || c.map_or_else(|| Ast::bool_lit(k2 % 2 == 0), Ast::ident);
    match index {
        0 => vec![Ast::var_decl(a, Type::Int, Ast::int_lit(k1))],
        1 => vec![Ast::var_decl(a, Type::Int, Ast::binary("+", int_src(), Ast::int_lit(k1)))],
        2 => vec![Ast::var_decl(a, Type::Bool, Ast::binary("<", int_src(), Ast::int_lit(k1)))],
        3 => vec![
            Ast::var_decl(a, Type::Int, Ast::int_lit(k1)),
            Ast::var_decl(b, Type::Int, Ast::binary("*", Ast::ident(a), Ast::int_lit(k2))),
        ],
        4 => vec![Ast::var_decl(a, Type::Bool, Ast::binary("||", bool_src(), Ast::unary("!", bool_src())))],
        5 => vec![
            Ast::var_decl(a, Type::Int, Ast::int_lit(0)),
            Ast::new(
                NodeKind::While,
                None,
                vec![
                    Ast::binary("<", Ast::ident(a), Ast::int_lit(k1.rem_euclid(4) + 1)),
                    Ast::block(vec![Ast::assign(Ast::ident(a), Ast::binary("+", Ast::ident(a), Ast::int_lit(1)))]),
                ],
            ),
        ],
        6 => vec![
            Ast::var_decl(a, Type::Int, int_src()),
            Ast::new(
                NodeKind::If,
                None,
                vec![
                    Ast::binary(">", Ast::ident(a), Ast::int_lit(k1)),
                    Ast::block(vec![Ast::assign(Ast::ident(a), Ast::binary("-", Ast::ident(a), Ast::int_lit(k1)))]),
                ],
            ),
        ],
        7 => vec![
            Ast::var_decl(a, Type::Int, Ast::int_lit(k1)),
            Ast::var_decl(b, Type::Int, Ast::binary("+", Ast::ident(a), int_src())),
            Ast::assign(Ast::ident(a), Ast::binary("-", Ast::ident(b), Ast::ident(a))),
        ],
        _ => panic!("template index {index} out of range"),
    }
}

/// Every template instantiated with placeholder names, for inspection.
pub fn dead_code_templates() -> Vec<Vec<Ast>> {
    (0..TEMPLATE_COUNT).map(|i| instantiate(i, "u0", "u1", Some("x"), Some("c"), 3, 2)).collect()
}

/// Inserts one dead-code template at a seeded-random position of a
/// seeded-random block. Inserted statements declare only fresh names and
/// read only in-scope scalars and constants.
pub fn apply_us(tree: &Ast, seed: u64, pool: &NamePool) -> Ast {
    let mut rng = Pcg32::seeded(seed);
    let all = blocks(tree);
    let block = rng.choose(&all).expect("every method has a body block");
    let position = rng.index(block.stmt_ids.len() + 1);
    let template = rng.index(TEMPLATE_COUNT);

    let scope = scalars_in_scope(tree, &block.path, position);
    let ints: Vec<&str> = scope.iter().filter(|(_, t)| *t == Type::Int).map(|(n, _)| n.as_str()).collect();
    let bools: Vec<&str> = scope.iter().filter(|(_, t)| *t == Type::Bool).map(|(n, _)| n.as_str()).collect();
    let x = rng.choose(&ints).copied();
    let c = rng.choose(&bools).copied();
    let k1 = rng.range_i64(-9, 9);
    let k2 = rng.range_i64(1, 9);

    let mut taken = program_names(tree);
    let a = pool.fresh(&taken, &mut rng);
    taken.insert(a.clone());
    let b = pool.fresh(&taken, &mut rng);

    let stmts = instantiate(template, &a, &b, x, c, k1, k2);
    let mut out = tree.clone();
    let target = out.at_path_mut(&block.path).expect("block path resolves");
    target.children.splice(position..position, stmts);
    out.renumber();
    out
}
