use std::collections::HashSet;

use super::{CorpusError, CorpusRecord};
use crate::numerics::{mix64, Pcg32};
use crate::syntax::{parse_source, print, Ast};
use crate::transform::{applicable, apply, NamePool, OperatorTag};

pub const MAX_FAMILIES: usize = 10;

/// Built-in program families, in generation order.
pub const FAMILIES: [&str; MAX_FAMILIES] = [
    "gcd",
    "fib",
    "array_sum",
    "linear_search",
    "bubble_pass",
    "min_max",
    "counting",
    "power",
    "digit_sum",
    "clamp_chain",
];

/// `families × variants` labelled programs; ids are `<family>-<variant>`.
pub fn generate_corpus(families: usize, variants: usize, seed: u64) -> Result<Vec<CorpusRecord>, CorpusError> {
    if families == 0 || families > MAX_FAMILIES {
        return Err(CorpusError::InvalidFamilyCount(families));
    }
    if variants == 0 {
        return Err(CorpusError::InvalidVariantCount);
    }
    let mut out = Vec::with_capacity(families * variants);
    let pool = NamePool::default();
    for (f, family) in FAMILIES.iter().enumerate().take(families) {
        for v in 0..variants {
            let mut g = Gen { rng: Pcg32::seeded(mix64(seed, f as u64, v as u64)), used: HashSet::new() };
            let source = g.family(f);
            let base = parse_source(&source).unwrap_or_else(|e| panic!("generator emitted invalid {family}: {e}\n{source}"));
            let tree = diversify(base, &mut g.rng, &pool);
            out.push(CorpusRecord { id: format!("{family}-{v:03}"), label: Some(family.to_string()), code: print(&tree) });
        }
    }
    Ok(out)
}

/// Applies up to `MAX_REWRITES` seeded rewrites, so variants of one family
/// differ in loop forms, dead statements and branch shapes as well as names,
/// constants and order.
fn diversify(mut tree: Ast, rng: &mut Pcg32, pool: &NamePool) -> Ast {
    let rounds = rng.index(MAX_REWRITES + 1);
    for _ in 0..rounds {
        let ops: Vec<OperatorTag> = applicable(&tree).into_iter().collect();
        let op = *rng.choose(&ops).expect("US always applies");
        tree = apply(op, &tree, rng.next_u64(), pool).expect("operator is applicable");
    }
    tree
}

pub const MAX_REWRITES: usize = 4;

const METHOD_NAMES: [&[&str]; MAX_FAMILIES] = [
    &["gcd", "euclid", "commonDivisor", "gcdOf", "hcf", "greatestCommon"],
    &["fib", "fibonacci", "fibIter", "nthFib", "fibSeq", "fibonacciNumber"],
    &["sumArray", "arraySum", "weightedSum", "total", "sumAll", "accumulate"],
    &["find", "indexOf", "linearSearch", "search", "locate", "findKey"],
    &["bubblePass", "sortPass", "bubble", "passOnce", "swapPass", "bubbleStep"],
    &["range", "spread", "minMax", "extent", "scanRange", "valueSpan"],
    &["countMultiples", "tally", "countHits", "census", "countBy", "bucketCount"],
    &["power", "pow", "raise", "expOf", "ipow", "powerOf"],
    &["digitSum", "sumDigits", "digits", "digitTotal", "crossSum", "addDigits"],
    &["clamp", "clampChain", "bound", "limitValue", "squash", "saturate"],
];

const COUNTERS: &[&str] = &["i", "j", "k", "idx", "pos", "step", "cursor", "at"];
const ACCUMULATORS: &[&str] = &["s", "sum", "total", "acc", "result", "res", "agg", "runningTotal"];
const SCALARS: &[&str] = &["n", "x", "value", "num", "input", "arg", "q", "m"];
const TEMPS: &[&str] = &["t", "tmp", "temp", "next", "spare", "hold", "swapTmp", "aux"];
const WEIGHTS: &[&str] = &["w", "weight", "scale", "factor", "coef", "mult", "gain"];
const ARRAYS: &[&str] = &["xs", "arr", "values", "data", "items", "nums", "elems", "buf"];

/// Builds the statement list before borrowing the generator for the shuffle.
macro_rules! shuffled {
    ($g:expr, [$($s:expr),* $(,)?]) => {{
        let stmts = vec![$($s),*];
        $g.shuffled(stmts)
    }};
}

struct Gen {
    rng: Pcg32,
    used: HashSet<String>,
}

impl Gen {
    fn name(&mut self, pool: &[&str]) -> String {
        let free: Vec<&&str> = pool.iter().filter(|n| !self.used.contains(**n)).collect();
        let name = match self.rng.choose(&free) {
            Some(n) => n.to_string(),
            None => (0..).map(|k| format!("{}{k}", pool[0])).find(|n| !self.used.contains(n)).expect("unbounded"),
        };
        self.used.insert(name.clone());
        name
    }

    fn k(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.range_i64(lo, hi)
    }

    /// Independent statements in seeded order.
    fn shuffled(&mut self, mut stmts: Vec<String>) -> String {
        self.rng.shuffle(&mut stmts);
        stmts.join(" ")
    }

    /// `while (cond) { body }` or the equivalent header-only `for`.
    fn cond_loop(&mut self, cond: &str, body: &str) -> String {
        if self.rng.coin() {
            format!("while ({cond}) {{ {body} }}")
        } else {
            format!("for (; {cond};) {{ {body} }}")
        }
    }

    /// Counting loop from 0 while `i < bound`, as a `for` or a `while`.
    fn count_loop(&mut self, i: &str, bound: &str, body: &str) -> String {
        if self.rng.coin() {
            format!("for (int {i} = 0; {i} < {bound}; {i} = {i} + 1) {{ {body} }}")
        } else {
            format!("int {i} = 0; while ({i} < {bound}) {{ {body} {i} = {i} + 1; }}")
        }
    }

    fn family(&mut self, f: usize) -> String {
        let name = self.name(METHOD_NAMES[f]);
        match f {
            0 => self.gcd(&name),
            1 => self.fib(&name),
            2 => self.array_sum(&name),
            3 => self.linear_search(&name),
            4 => self.bubble_pass(&name),
            5 => self.min_max(&name),
            6 => self.counting(&name),
            7 => self.power(&name),
            8 => self.digit_sum(&name),
            _ => self.clamp_chain(&name),
        }
    }

    fn gcd(&mut self, f: &str) -> String {
        let (a, b, t, c) = (self.name(SCALARS), self.name(SCALARS), self.name(TEMPS), self.name(COUNTERS));
        let guards = shuffled!(self, [
            format!("if ({a} < 0) {{ {a} = -{a}; }}"),
            format!("if ({b} < 0) {{ {b} = -{b}; }}"),
            format!("int {c} = {};", self.k(0, 30)),
        ]);
        let body = format!("int {t} = {a} % {b}; {a} = {b}; {b} = {t}; {c} = {c} + 1;");
        let lp = self.cond_loop(&format!("{b} != 0"), &body);
        let k1 = self.k(1, 40);
        format!("int {f}(int {a}, int {b}) {{ {guards} {lp} return {a} * {k1} + {c}; }}")
    }

    fn fib(&mut self, f: &str) -> String {
        let (n, x, y, t, i) = (self.name(SCALARS), self.name(ACCUMULATORS), self.name(ACCUMULATORS), self.name(TEMPS), self.name(COUNTERS));
        let init = shuffled!(self, [format!("int {x} = {};", self.k(0, 40)), format!("int {y} = {};", self.k(1, 40))]);
        let cap = self.k(8, 30);
        let lp = self.count_loop(&i, &n, &format!("int {t} = {x} + {y}; {x} = {y}; {y} = {t};"));
        format!("int {f}(int {n}) {{ {init} if ({n} > {cap}) {{ {n} = {cap}; }} {lp} return {x}; }}")
    }

    fn array_sum(&mut self, f: &str) -> String {
        let (xs, s, w, i) = (self.name(ARRAYS), self.name(ACCUMULATORS), self.name(WEIGHTS), self.name(COUNTERS));
        let init = shuffled!(self, [format!("int {s} = {};", self.k(-40, 40)), format!("int {w} = {};", self.k(1, 40))]);
        let lp = self.count_loop(&i, &format!("len({xs})"), &format!("{s} = {s} + {xs}[{i}] * {w};"));
        format!("int {f}(int[] {xs}) {{ {init} {lp} return {s}; }}")
    }

    fn linear_search(&mut self, f: &str) -> String {
        let (xs, key, miss, i) = (self.name(ARRAYS), self.name(SCALARS), self.name(TEMPS), self.name(COUNTERS));
        let (k0, k1) = (self.k(1, 80), self.k(-9, 9));
        let init = shuffled!(self, [format!("int {miss} = -{k0};"), format!("{key} = {key} + {k1};")]);
        let lp = self.count_loop(&i, &format!("len({xs})"), &format!("if ({xs}[{i}] == {key}) {{ return {i}; }}"));
        format!("int {f}(int[] {xs}, int {key}) {{ {init} {lp} return {miss}; }}")
    }

    fn bubble_pass(&mut self, f: &str) -> String {
        let (xs, sw, lim, t, i) = (self.name(ARRAYS), self.name(ACCUMULATORS), self.name(SCALARS), self.name(TEMPS), self.name(COUNTERS));
        let init = shuffled!(self, [format!("int {sw} = {};", self.k(0, 20)), format!("int {lim} = len({xs}) - 1;")]);
        let body = format!(
            "if ({xs}[{i}] > {xs}[{i} + 1]) {{ int {t} = {xs}[{i}]; {xs}[{i}] = {xs}[{i} + 1]; {xs}[{i} + 1] = {t}; {sw} = {sw} + 1; }}"
        );
        let lp = self.count_loop(&i, &lim, &body);
        let (k0, k1) = (self.k(1, 30), self.k(1, 30));
        format!("int {f}(int[] {xs}) {{ {init} {lp} if (len({xs}) > 0) {{ return {xs}[0] * {k0} + {sw}; }} return {sw} - {k1}; }}")
    }

    fn min_max(&mut self, f: &str) -> String {
        let (xs, lo, hi, v, i) = (self.name(ARRAYS), self.name(ACCUMULATORS), self.name(ACCUMULATORS), self.name(TEMPS), self.name(COUNTERS));
        let init = shuffled!(self, [format!("int {lo} = {};", self.k(17, 60)), format!("int {hi} = -{};", self.k(17, 60))]);
        let body = format!("int {v} = {xs}[{i}]; if ({v} < {lo}) {{ {lo} = {v}; }} if ({v} > {hi}) {{ {hi} = {v}; }}");
        let lp = self.count_loop(&i, &format!("len({xs})"), &body);
        let k = self.k(1, 20);
        format!("int {f}(int[] {xs}) {{ {init} {lp} return {hi} * {k} - {lo}; }}")
    }

    fn counting(&mut self, f: &str) -> String {
        let (n, c, other, i) = (self.name(SCALARS), self.name(ACCUMULATORS), self.name(ACCUMULATORS), self.name(COUNTERS));
        let m = self.k(3, 7);
        let r = self.k(1, m - 1);
        let init = shuffled!(self, [
            format!("int {c} = 0;"),
            format!("int {other} = {};", self.k(0, 50)),
            format!("if ({n} < 0) {{ {n} = -{n}; }}"),
        ]);
        let body = format!(
            "switch ({i} % {m}) {{ case 0: {c} = {c} + 1; break; case {r}: {other} = {other} + {i}; break; default: break; }}"
        );
        let lp = self.count_loop(&i, &n, &body);
        let k = self.k(1, 30);
        format!("int {f}(int {n}) {{ {init} {lp} return {c} * {k} + {other}; }}")
    }

    fn power(&mut self, f: &str) -> String {
        let (b, e, r, k) = (self.name(SCALARS), self.name(SCALARS), self.name(ACCUMULATORS), self.name(WEIGHTS));
        let init = shuffled!(self, [
            format!("int {r} = 1;"),
            format!("int {k} = {};", self.k(0, 60)),
            format!("if ({e} < 0) {{ {e} = -{e}; }}"),
        ]);
        let modulus = self.k(4, 9);
        let lp = self.cond_loop(&format!("{e} > 0"), &format!("{r} = {r} * {b}; {e} = {e} - 1;"));
        format!("int {f}(int {b}, int {e}) {{ {init} {e} = {e} % {modulus}; {lp} return {r} + {k}; }}")
    }

    fn digit_sum(&mut self, f: &str) -> String {
        let (n, s, base) = (self.name(SCALARS), self.name(ACCUMULATORS), self.name(WEIGHTS));
        let init = shuffled!(self, [
            format!("int {s} = {};", self.k(0, 20)),
            format!("int {base} = {};", self.k(2, 10)),
            format!("if ({n} < 0) {{ {n} = -{n}; }}"),
        ]);
        let (k1, k2) = (self.k(1, 50), self.k(0, 99));
        let lp = self.cond_loop(&format!("{n} > 0"), &format!("{s} = {s} + {n} % {base}; {n} = {n} / {base};"));
        format!("int {f}(int {n}) {{ {init} {n} = {n} * {k1} + {k2}; {lp} return {s}; }}")
    }

    fn clamp_chain(&mut self, f: &str) -> String {
        let (x, flag, lo, hi) = (self.name(SCALARS), self.name(&["flag", "up", "enabled", "shift", "bump"]), self.name(ACCUMULATORS), self.name(ACCUMULATORS));
        let m = self.k(3, 6);
        let (k2, k3, k4) = (self.k(1, 40), self.k(1, 40), self.k(2, 5));
        let init = shuffled!(self, [format!("int {lo} = -{};", self.k(1, 40)), format!("int {hi} = {};", self.k(1, 40))]);
        let switch = format!(
            "switch ({x} % {m}) {{ case 0: {x} = {x} + {k2}; break; case 1: case -1: {x} = {x} - {k3}; break; default: {x} = {x} * {k4}; break; }}"
        );
        let tail = shuffled!(self, [format!("if ({x} < {lo}) {{ {x} = {lo}; }}"), format!("if ({x} > {hi}) {{ {x} = {hi}; }}")]);
        format!("int {f}(int {x}, bool {flag}) {{ {init} {switch} if ({flag}) {{ {x} = {x} + 1; }} {tail} return {x}; }}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::{generate_args, run, signature, Outcome, DEFAULT_STEP_BUDGET};
    use crate::syntax::parse_source;

    #[test]
    fn cardinality_and_labels() {
        let records = generate_corpus(5, 20, 1).unwrap();
        assert_eq!(records.len(), 100);
        let labels: HashSet<_> = records.iter().map(|r| r.label.clone().unwrap()).collect();
        assert_eq!(labels.len(), 5);
        let ids: HashSet<_> = records.iter().map(|r| r.id.clone()).collect();
        assert_eq!(ids.len(), 100);
    }

    #[test]
    fn deterministic() {
        assert_eq!(generate_corpus(10, 5, 42).unwrap(), generate_corpus(10, 5, 42).unwrap());
        assert_ne!(generate_corpus(10, 5, 42).unwrap(), generate_corpus(10, 5, 43).unwrap());
    }

    #[test]
    fn invalid_counts() {
        assert!(matches!(generate_corpus(11, 1, 0), Err(CorpusError::InvalidFamilyCount(11))));
        assert!(matches!(generate_corpus(0, 1, 0), Err(CorpusError::InvalidFamilyCount(0))));
        assert!(matches!(generate_corpus(1, 0, 0), Err(CorpusError::InvalidVariantCount)));
    }

    #[test]
    fn programs_terminate_on_fuzz_inputs() {
        for record in generate_corpus(10, 20, 7).unwrap() {
            let tree = parse_source(&record.code).unwrap();
            let entry = tree.children[0].token_str().to_string();
            let sig = signature(&tree, &entry).unwrap();
            let mut rng = Pcg32::seeded(3);
            for _ in 0..10 {
                let outcome = run(&tree, &entry, &generate_args(&sig, &mut rng), DEFAULT_STEP_BUDGET);
                assert!(matches!(outcome, Outcome::Returned(Some(_))), "{}: {outcome:?}", record.id);
            }
        }
    }

    #[test]
    fn variants_differ() {
        let records = generate_corpus(10, 50, 42).unwrap();
        let codes: HashSet<_> = records.iter().map(|r| r.code.clone()).collect();
        assert_eq!(codes.len(), records.len());
    }
}
