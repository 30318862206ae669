use std::collections::BTreeMap;

use serde::Serialize;

use super::EvalError;
use crate::encoder::CodeVector;
use crate::numerics::{gemm, Matrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Centre and scale every feature by its training mean and deviation.
    pub standardize: bool,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { epochs: 500, learning_rate: 0.1, standardize: false }
    }
}

/// Multinomial logistic regression over frozen embeddings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeModel {
    /// Class names in ascending order; class `c` is row `c` of `weights`.
    pub classes: Vec<String>,
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub feature_mean: Vec<f64>,
    pub feature_scale: Vec<f64>,
}

fn dimension(x: &[CodeVector]) -> Result<usize, EvalError> {
    let d = x.first().ok_or(EvalError::EmptyQuerySet)?.len();
    if let Some(bad) = x.iter().find(|v| v.len() != d) {
        return Err(EvalError::DimensionMismatch { expected: d, found: bad.len() });
    }
    Ok(d)
}

/// Full-batch gradient descent on mean cross-entropy from zero weights.
pub fn train_probe(x: &[CodeVector], labels: &[String], config: &ProbeConfig) -> Result<ProbeModel, EvalError> {
    if x.len() != labels.len() {
        return Err(EvalError::LengthMismatch { left: x.len(), right: labels.len() });
    }
    let d = dimension(x)?;
    let classes: Vec<String> = labels.iter().cloned().collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    if classes.len() < 2 {
        return Err(EvalError::SingleClass);
    }
    let class_of: BTreeMap<&str, usize> = classes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let y: Vec<usize> = labels.iter().map(|l| class_of[l.as_str()]).collect();
    let (n, c) = (x.len(), classes.len());

    let (feature_mean, feature_scale) = if config.standardize {
        let mean: Vec<f64> = (0..d).map(|j| x.iter().map(|v| v[j]).sum::<f64>() / n as f64).collect();
        let scale: Vec<f64> = (0..d)
            .map(|j| {
                let var = x.iter().map(|v| (v[j] - mean[j]).powi(2)).sum::<f64>() / n as f64;
                if var > 0.0 {
                    1.0 / var.sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        (mean, scale)
    } else {
        (vec![0.0; d], vec![1.0; d])
    };
    let mut model = ProbeModel { classes, weights: Matrix::zeros(c, d), bias: vec![0.0; c], feature_mean, feature_scale };
    let features = model.features(x);

    let mut logits = Matrix::zeros(n, c);
    let mut grad_w = Matrix::zeros(c, d);
    for _ in 0..config.epochs {
        gemm(&features, false, &model.weights, true, 0.0, &mut logits);
        // logits become p − onehot, scaled by 1/n.
        for i in 0..n {
            let row = logits.row_mut(i);
            row.iter_mut().zip(&model.bias).for_each(|(z, b)| *z += b);
            softmax_in_place(row);
            row[y[i]] -= 1.0;
            row.iter_mut().for_each(|g| *g /= n as f64);
        }
        gemm(&logits, true, &features, false, 0.0, &mut grad_w);
        for (w, g) in model.weights.as_mut_slice().iter_mut().zip(grad_w.as_slice()) {
            *w -= config.learning_rate * g;
        }
        for k in 0..c {
            let g: f64 = (0..n).map(|i| logits.get(i, k)).sum();
            model.bias[k] -= config.learning_rate * g;
        }
    }
    Ok(model)
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    row.iter_mut().for_each(|z| *z = (*z - max).exp());
    let sum: f64 = row.iter().sum();
    row.iter_mut().for_each(|z| *z /= sum);
}

impl ProbeModel {
    fn features(&self, x: &[CodeVector]) -> Matrix {
        let d = self.feature_mean.len();
        let mut m = Matrix::zeros(x.len(), d);
        for (i, v) in x.iter().enumerate() {
            let row = m.row_mut(i);
            for j in 0..d {
                row[j] = (v[j] - self.feature_mean[j]) * self.feature_scale[j];
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.feature_mean.len()
    }

    pub fn logits(&self, v: &[f64]) -> Vec<f64> {
        let f = self.features(std::slice::from_ref(&v.to_vec()));
        (0..self.classes.len()).map(|k| crate::numerics::dot(self.weights.row(k), f.row(0)) + self.bias[k]).collect()
    }
}

/// Predicted class index; ties go to the lowest index.
pub fn predict(model: &ProbeModel, v: &[f64]) -> Result<usize, EvalError> {
    if v.len() != model.dim() {
        return Err(EvalError::DimensionMismatch { expected: model.dim(), found: v.len() });
    }
    let logits = model.logits(v);
    let mut best = 0;
    for k in 1..logits.len() {
        if logits[k] > logits[best] {
            best = k;
        }
    }
    Ok(best)
}

/// Fraction of items whose predicted class name equals the label.
pub fn accuracy(model: &ProbeModel, x: &[CodeVector], labels: &[String]) -> Result<f64, EvalError> {
    if x.len() != labels.len() {
        return Err(EvalError::LengthMismatch { left: x.len(), right: labels.len() });
    }
    if x.is_empty() {
        return Err(EvalError::EmptyQuerySet);
    }
    let mut correct = 0;
    for (v, label) in x.iter().zip(labels) {
        if model.classes[predict(model, v)?] == *label {
            correct += 1;
        }
    }
    Ok(correct as f64 / x.len() as f64)
}

/// Precision per class; `None` for classes never predicted.
pub fn per_class_precision(model: &ProbeModel, x: &[CodeVector], labels: &[String]) -> Result<Vec<(String, Option<f64>)>, EvalError> {
    let mut predicted = vec![0usize; model.classes.len()];
    let mut correct = vec![0usize; model.classes.len()];
    for (v, label) in x.iter().zip(labels) {
        let k = predict(model, v)?;
        predicted[k] += 1;
        if model.classes[k] == *label {
            correct[k] += 1;
        }
    }
    Ok(model
        .classes
        .iter()
        .enumerate()
        .map(|(k, c)| (c.clone(), (predicted[k] > 0).then(|| correct[k] as f64 / predicted[k] as f64)))
        .collect())
}
