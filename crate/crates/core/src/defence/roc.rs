//! ROC curves for suspicion scores.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RocCurve {
    /// `(fpr, tpr)` from `(0, 0)` to `(1, 1)`.
    pub points: Vec<(f64, f64)>,
    /// Threshold giving each point (`+inf` for the first).
    pub thresholds: Vec<f64>,
    pub auc: f64,
}

/// Sweeps every distinct score as a threshold (`score >= t` is positive).
/// Equal scores enter together, so ties count half in the area.
pub fn roc_auc(scores: &[(f64, bool)]) -> Result<RocCurve> {
    let pos = scores.iter().filter(|s| s.1).count();
    let neg = scores.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::usage(
            "ROC needs both positive and negative examples",
        ));
    }
    if scores.iter().any(|s| s.0.is_nan()) {
        return Err(Error::usage("ROC scores must not be NaN"));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut points = vec![(0.0, 0.0)];
    let mut thresholds = vec![f64::INFINITY];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == t {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
        thresholds.push(t);
    }
    let auc = points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum();
    Ok(RocCurve {
        points,
        thresholds,
        auc,
    })
}
