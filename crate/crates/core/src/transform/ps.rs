use super::{OperatorTag, TransformError};
use crate::analysis::swappable_pairs;
use crate::numerics::Pcg32;
use crate::syntax::Ast;

/// Transposes one seeded-random pair from [`swappable_pairs`].
pub fn apply_ps(tree: &Ast, seed: u64) -> Result<Ast, TransformError> {
    let pairs = swappable_pairs(tree);
    let mut rng = Pcg32::seeded(seed);
    let pair = rng.choose(&pairs).ok_or(TransformError::NotApplicable(OperatorTag::PS))?;
    let mut out = tree.clone();
    out.at_path_mut(&pair.block_path).expect("block path").children.swap(pair.index, pair.index + 1);
    out.renumber();
    Ok(out)
}
