//! Linear softmax classifier and the unified loss family.
//!
//! The classifier is p = softmax(W·h + b). Three losses share one form,
//! L = −Σ_i y_i · log|z − p_i|, switched by the flag z on the label:
//! z = 0 recovers positive cross-entropy (−Σ y_i log p_i) and z = 1
//! recovers set-negative training (−Σ y_i log(1 − p_i)), which pushes
//! probability away from a sampled non-candidate label.

pub mod checkpoint;
mod trainer;

pub use trainer::{train, DevSet, TrainConfig, TrainOutcome};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::encoder::FeatureVector;
use crate::error::{CoreError, Result};

/// Clamp floor for log arguments, so p = 0 or 1 − p = 0 cannot produce
/// infinities. Inside the clamp the loss is flat, so gradients there are 0.
pub const PROB_FLOOR: f64 = 1e-12;

/// Class probabilities over the M relations; entries in [0,1], sum 1.
pub type ProbabilityDistribution = Array1<f64>;

/// Training target: a nonnegative weight per relation plus the flag z.
///
/// z = 0 trains listed labels positively (one-hot for hard tags,
/// fractional for soft or averaged-candidate tags); z = 1 trains the
/// listed label(s) negatively.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelVector {
    pub y: Array1<f64>,
    pub z: u8,
}

impl LabelVector {
    pub fn one_hot(m: usize, index: usize, z: u8) -> Self {
        assert!(index < m && z <= 1);
        let mut y = Array1::zeros(m);
        y[index] = 1.0;
        LabelVector { y, z }
    }

    /// Multi-hot over a candidate set, flagged for negative training (z=1).
    pub fn multi_hot(m: usize, indices: &[usize]) -> Self {
        assert!(!indices.is_empty());
        let mut y = Array1::zeros(m);
        for &i in indices {
            assert!(i < m);
            y[i] = 1.0;
        }
        LabelVector { y, z: 1 }
    }

    /// Fractional positive label equal to a probability distribution (z=0).
    pub fn soft(p: &ProbabilityDistribution) -> Self {
        LabelVector { y: p.clone(), z: 0 }
    }

    /// Uniform fractional positive mass over a candidate set (z=0).
    pub fn fractional_uniform(m: usize, indices: &[usize]) -> Self {
        assert!(!indices.is_empty());
        let w = 1.0 / indices.len() as f64;
        let mut y = Array1::zeros(m);
        for &i in indices {
            assert!(i < m);
            y[i] = w;
        }
        LabelVector { y, z: 0 }
    }

    /// Index of the single nonzero entry; None when not one-hot.
    pub fn one_hot_index(&self) -> Option<usize> {
        let mut found = None;
        for (i, &v) in self.y.iter().enumerate() {
            if v != 0.0 {
                match (found, v) {
                    (None, 1.0) => found = Some(i),
                    _ => return None,
                }
            }
        }
        found
    }
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(values: &Array1<f64>) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Max-subtracted softmax; shift-invariant and overflow-safe.
pub fn softmax(logits: &Array1<f64>) -> ProbabilityDistribution {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut p = logits.mapv(|v| (v - max).exp());
    let sum = p.sum();
    p /= sum;
    p
}

/// Linear classifier, W of shape M × D plus bias b of length M.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl LinearModel {
    /// Zero initialization: softmax of zero logits is uniform.
    pub fn zeros(m: usize, d: usize) -> Self {
        LinearModel {
            w: Array2::zeros((m, d)),
            b: Array1::zeros(m),
        }
    }

    pub fn num_relations(&self) -> usize {
        self.b.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.w.ncols()
    }

    fn check_features(&self, h: &FeatureVector) -> Result<()> {
        if h.len() != self.feature_dim() {
            return Err(CoreError::DimensionMismatch(format!(
                "feature length {} does not match model dimension {}",
                h.len(),
                self.feature_dim()
            )));
        }
        Ok(())
    }

    pub fn predict_proba(&self, h: &FeatureVector) -> Result<ProbabilityDistribution> {
        self.check_features(h)?;
        let logits = self.w.dot(h) + &self.b;
        Ok(softmax(&logits))
    }

    /// Argmax relation index.
    pub fn predict(&self, h: &FeatureVector) -> Result<usize> {
        Ok(argmax(&self.predict_proba(h)?))
    }
}

fn clamped_ln(v: f64) -> f64 {
    v.max(PROB_FLOOR).ln()
}

/// Positive cross-entropy −Σ y_i log p_i; accepts fractional y.
pub fn loss_positive(p: &ProbabilityDistribution, label: &LabelVector) -> f64 {
    label
        .y
        .iter()
        .zip(p)
        .filter(|(&yi, _)| yi != 0.0)
        .map(|(&yi, &pi)| -yi * clamped_ln(pi))
        .sum()
}

/// Set-negative loss −Σ y_i log(1 − p_i); one-hot y selects the sampled
/// negative label, giving −log(1 − p_k).
pub fn loss_set_negative(p: &ProbabilityDistribution, label: &LabelVector) -> f64 {
    label
        .y
        .iter()
        .zip(p)
        .filter(|(&yi, _)| yi != 0.0)
        .map(|(&yi, &pi)| -yi * clamped_ln(1.0 - pi))
        .sum()
}

/// Unified loss −Σ y_i log|z − p_i|: positive training at z = 0,
/// set-negative training at z = 1.
pub fn loss_unified(p: &ProbabilityDistribution, label: &LabelVector) -> f64 {
    let z = label.z as f64;
    label
        .y
        .iter()
        .zip(p)
        .filter(|(&yi, _)| yi != 0.0)
        .map(|(&yi, &pi)| -yi * clamped_ln((z - pi).abs()))
        .sum()
}

/// Gradient of the unified loss with respect to the logits.
///
/// Per active label i: z = 0 contributes y_i·(p − e_i); z = 1 contributes
/// y_i·(p_i/(1−p_i))·(e_i − p), whose entry at i is y_i·p_i > 0 — so a
/// descent step lowers the probability of a sampled negative label.
/// Labels inside the clamp floor sit on the flat part of the loss and
/// contribute nothing.
fn unified_dlogits(p: &ProbabilityDistribution, label: &LabelVector) -> Array1<f64> {
    let mut g = Array1::<f64>::zeros(p.len());
    for (i, &yi) in label.y.iter().enumerate() {
        if yi == 0.0 {
            continue;
        }
        if label.z == 0 {
            if p[i] <= PROB_FLOOR {
                continue;
            }
            g.scaled_add(yi, p);
            g[i] -= yi;
        } else {
            let q = 1.0 - p[i];
            if q <= PROB_FLOOR {
                continue;
            }
            let c = yi * p[i] / q;
            g.scaled_add(-c, p);
            g[i] += c;
        }
    }
    g
}

/// Mean gradient of the unified loss over a batch, with the l2 penalty on
/// W folded in. Returns (dW, db).
pub fn gradient(
    model: &LinearModel,
    batch: &[(FeatureVector, LabelVector)],
    l2: f64,
) -> Result<(Array2<f64>, Array1<f64>)> {
    if batch.is_empty() {
        return Err(CoreError::Empty("gradient batch"));
    }
    let m = model.num_relations();
    let d = model.feature_dim();
    let mut dw = Array2::<f64>::zeros((m, d));
    let mut db = Array1::<f64>::zeros(m);
    for (h, label) in batch {
        if label.y.len() != m {
            return Err(CoreError::DimensionMismatch(format!(
                "label length {} does not match {m} relations",
                label.y.len()
            )));
        }
        let p = model.predict_proba(h)?;
        let g = unified_dlogits(&p, label);
        for (j, &gj) in g.iter().enumerate() {
            if gj != 0.0 {
                dw.row_mut(j).scaled_add(gj, h);
            }
        }
        db += &g;
    }
    let scale = 1.0 / batch.len() as f64;
    dw *= scale;
    db *= scale;
    if l2 > 0.0 {
        dw.scaled_add(l2, &model.w);
    }
    Ok((dw, db))
}
