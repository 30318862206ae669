use super::ContrastiveError;
use crate::numerics::{dot, gemm, l2_norm, Matrix, NumericsError};

/// Index of the positive partner of view `i`: views `2k` and `2k + 1` pair up.
pub fn partner(i: usize) -> usize {
    i ^ 1
}

/// Pairwise cosine similarities of the rows of `vectors`.
pub fn similarity_matrix(vectors: &Matrix) -> Result<Matrix, ContrastiveError> {
    let unit = vectors.rowwise_l2_normalize().map_err(|e| match e {
        NumericsError::ZeroNorm { row } => ContrastiveError::ZeroVector { index: row },
        _ => ContrastiveError::ZeroVector { index: 0 },
    })?;
    Ok(gram(&unit))
}

/// `U Uᵀ`, computed once per unordered pair so the result is exactly symmetric.
fn gram(unit: &Matrix) -> Matrix {
    let n = unit.rows();
    let mut s = Matrix::zeros(n, n);
    for i in 0..n {
        for k in i..n {
            let x = dot(unit.row(i), unit.row(k));
            s.set(i, k, x);
            s.set(k, i, x);
        }
    }
    s
}

/// Symmetrized NT-Xent loss over `2N` views and its gradient with respect to
/// every input row.
///
/// `L = 1/(2N) Σ_i [ −s(i, p(i)) + log Σ_{k≠i} exp(s(i, k)) ]`, `s = cos / T`.
pub fn nt_xent(vectors: &Matrix, temperature: f64) -> Result<(f64, Matrix), ContrastiveError> {
    if !(temperature > 0.0) {
        return Err(ContrastiveError::NonPositiveTemperature(temperature));
    }
    let (rows, d) = vectors.shape();
    if rows == 0 || rows % 2 != 0 {
        return Err(ContrastiveError::OddViewCount(rows));
    }
    let norms: Vec<f64> = (0..rows).map(|r| l2_norm(vectors.row(r))).collect();
    if let Some(index) = norms.iter().position(|&n| n == 0.0) {
        return Err(ContrastiveError::ZeroVector { index });
    }
    let mut unit = vectors.clone();
    for (r, norm) in norms.iter().enumerate() {
        unit.row_mut(r).iter_mut().for_each(|x| *x /= norm);
    }
    let mut logits = gram(&unit);
    logits.as_mut_slice().iter_mut().for_each(|x| *x /= temperature);

    let scale = 1.0 / rows as f64;
    let mut loss = 0.0;
    // g[i][k] = ∂L/∂s(i, k)
    let mut g = Matrix::zeros(rows, rows);
    for i in 0..rows {
        let row = logits.row(i);
        let max = (0..rows).filter(|&k| k != i).map(|k| row[k]).fold(f64::NEG_INFINITY, f64::max);
        let denom: f64 = (0..rows).filter(|&k| k != i).map(|k| (row[k] - max).exp()).sum();
        let positive = partner(i);
        loss += max + denom.ln() - row[positive];
        let grow = g.row_mut(i);
        for k in 0..rows {
            if k != i {
                grow[k] = scale * ((row[k] - max).exp() / denom);
            }
        }
        grow[positive] -= scale;
    }
    loss *= scale;

    // ∂L/∂u_i = (1/T) Σ_k (g[i][k] + g[k][i]) u_k
    let mut sym = g.clone();
    for i in 0..rows {
        for k in 0..rows {
            sym.set(i, k, (g.get(i, k) + g.get(k, i)) / temperature);
        }
    }
    let mut du = Matrix::zeros(rows, d);
    gemm(&sym, false, &unit, false, 0.0, &mut du);
    let mut dv = du;
    for r in 0..rows {
        let u = unit.row(r).to_vec();
        let row = dv.row_mut(r);
        let radial: f64 = row.iter().zip(&u).map(|(a, b)| a * b).sum();
        for j in 0..d {
            row[j] = (row[j] - u[j] * radial) / norms[r];
        }
    }
    Ok((loss, dv))
}
