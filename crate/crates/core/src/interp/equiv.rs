//! Differential input/output equivalence on an entry method.

use super::{run, Outcome, Value, DEFAULT_STEP_BUDGET};
use crate::numerics::Pcg32;
use crate::syntax::{Ast, Type};

pub const INT_RANGE: (i64, i64) = (-16, 16);
pub const ARRAY_LEN_RANGE: (i64, i64) = (0, 8);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    /// Arguments on which the two programs observably differ.
    Inequivalent(Vec<Value>),
    /// Every disagreement involved a step-budget exhaustion.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EquivalenceError {
    #[error("entry method `{0}` is missing")]
    MissingEntry(String),
    #[error("entry method `{0}` has different signatures")]
    SignatureMismatch(String),
}

/// Parameter types of `entry` in `program`.
pub fn signature(program: &Ast, entry: &str) -> Option<Vec<Type>> {
    program.method(entry).map(|m| m.params().iter().map(|p| p.ty.expect("typed param")).collect())
}

/// Draws one argument vector: ints uniform in [-16, 16], bools fair, arrays
/// of length 0..=8 with int elements.
pub fn generate_args(types: &[Type], rng: &mut Pcg32) -> Vec<Value> {
    types
        .iter()
        .map(|ty| match ty {
            Type::Int => Value::Int(rng.range_i64(INT_RANGE.0, INT_RANGE.1)),
            Type::Bool => Value::Bool(rng.coin()),
            Type::IntArray => {
                let len = rng.range_i64(ARRAY_LEN_RANGE.0, ARRAY_LEN_RANGE.1);
                Value::array((0..len).map(|_| rng.range_i64(INT_RANGE.0, INT_RANGE.1)).collect())
            }
        })
        .collect()
}

/// Runs both programs on `trials` seeded argument vectors and compares outcomes.
pub fn equivalent(p1: &Ast, p2: &Ast, entry: &str, trials: usize, seed: u64) -> Result<Verdict, EquivalenceError> {
    let sig1 = signature(p1, entry).ok_or_else(|| EquivalenceError::MissingEntry(entry.to_string()))?;
    let sig2 = signature(p2, entry).ok_or_else(|| EquivalenceError::MissingEntry(entry.to_string()))?;
    if sig1 != sig2 {
        return Err(EquivalenceError::SignatureMismatch(entry.to_string()));
    }
    let mut rng = Pcg32::seeded(seed);
    let mut inconclusive = false;
    for _ in 0..trials {
        let args = generate_args(&sig1, &mut rng);
        let a = run(p1, entry, &args, DEFAULT_STEP_BUDGET);
        let b = run(p2, entry, &args, DEFAULT_STEP_BUDGET);
        if a != b {
            if a == Outcome::StepBudgetExceeded || b == Outcome::StepBudgetExceeded {
                inconclusive = true;
            } else {
                return Ok(Verdict::Inequivalent(args));
            }
        }
    }
    Ok(if inconclusive { Verdict::Inconclusive } else { Verdict::Equivalent })
}
