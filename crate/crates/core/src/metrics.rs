//! Edge-recovery classification scores, ROC points and Frobenius distance
//! between partial-correlation matrices.

use serde::{Deserialize, Serialize};

use crate::error::{GgmError, Result};
use crate::model::{EdgeSet, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Counts over all `p(p − 1)/2` unordered pairs.
pub fn confusion(truth: &EdgeSet, estimate: &EdgeSet) -> Result<ConfusionCounts> {
    if truth.p() != estimate.p() {
        return Err(GgmError::Dimension(format!("truth has {} nodes, estimate has {}", truth.p(), estimate.p())));
    }
    let p = truth.p();
    let tp = truth.iter().filter(|&(i, j)| estimate.contains(i, j)).count();
    let fp = estimate.len() - tp;
    let fn_ = truth.len() - tp;
    let tn = p * p.saturating_sub(1) / 2 - tp - fp - fn_;
    Ok(ConfusionCounts { tp, fp, tn, fn_ })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationScores {
    pub accuracy: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub fpr: f64,
    pub tpr: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Accuracy, F1, precision, recall and the two ROC rates. Empty
/// denominators give 0.
pub fn classification_scores(c: &ConfusionCounts) -> ClassificationScores {
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    ClassificationScores {
        accuracy: ratio(c.tp + c.tn, c.total()),
        f1,
        precision,
        recall,
        fpr: ratio(c.fp, c.fp + c.tn),
        tpr: recall,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub lambda: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocPath {
    pub points: Vec<RocPoint>,
    pub selected_index: Option<usize>,
}

/// One `(fpr, tpr)` point per `λ`, all at a fixed `α`.
pub fn roc_path(truth: &EdgeSet, estimates: &[(f64, EdgeSet)]) -> Result<RocPath> {
    let points = estimates
        .iter()
        .map(|(lambda, e)| {
            let s = classification_scores(&confusion(truth, e)?);
            Ok(RocPoint { lambda: *lambda, fpr: s.fpr, tpr: s.tpr })
        })
        .collect::<Result<_>>()?;
    Ok(RocPath { points, selected_index: None })
}

/// `√(Σᵢ Σⱼ (p_ij − p̂_ij)²)` over both triangles.
pub fn frobenius_distance(p_true: &SymMatrix, p_hat: &SymMatrix) -> Result<f64> {
    if p_true.dim() != p_hat.dim() {
        return Err(GgmError::Dimension(format!("{} vs {}", p_true.dim(), p_hat.dim())));
    }
    Ok((p_true.as_matrix() - p_hat.as_matrix()).norm())
}
