//! Outlier scores over forests: loss of voting confidence, and similarity
//! of leaf activations to the training data.

use rayon::prelude::*;
use serde::Serialize;

use crate::dataio::Dataset;
use crate::forest::Forest;
use crate::tree::{Classifier, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Loss,
    Activation,
}

impl std::str::FromStr for Method {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s {
            "loss" => Ok(Method::Loss),
            "activation" => Ok(Method::Activation),
            other => Err(crate::error::Error::usage(format!(
                "unknown detection method '{other}' (loss|activation)"
            ))),
        }
    }
}

/// A suspicion score in `[0, 1]`; higher means more suspicious.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DetectionScore {
    pub score: f64,
    pub method: Method,
    pub threshold_used: Option<f64>,
}

impl DetectionScore {
    pub fn flagged(&self) -> Option<bool> {
        self.threshold_used.map(|t| self.score >= t)
    }
}

/// `1 - (votes for the winning class) / n`.
pub fn model_loss(m: &Forest, x: &[f64]) -> f64 {
    let votes = m.votes(x);
    let top = votes.iter().copied().max().unwrap_or(0);
    1.0 - top as f64 / m.len() as f64
}

pub fn mean_loss(m: &Forest, d: &Dataset) -> f64 {
    if d.is_empty() {
        return 0.0;
    }
    d.rows().iter().map(|x| model_loss(m, x)).sum::<f64>() / d.len() as f64
}

/// `true` when the loss of `x` exceeds the mean loss over `d_ref` by at
/// least `eps1`.
pub fn loss_outlier(m: &Forest, x: &[f64], d_ref: &Dataset, eps1: f64) -> bool {
    model_loss(m, x) - mean_loss(m, d_ref) >= eps1
}

/// Leaf signatures of the training data, grouped by predicted class.
#[derive(Clone, Debug)]
pub struct ActivationIndex {
    by_class: Vec<Vec<Vec<NodeId>>>,
}

impl ActivationIndex {
    pub fn new(m: &Forest, d_train: &Dataset) -> ActivationIndex {
        let mut by_class = vec![Vec::new(); m.n_classes()];
        let sigs: Vec<(usize, Vec<NodeId>)> = d_train
            .rows()
            .par_iter()
            .map(|x| (m.predict(x), m.leaf_signature(x)))
            .collect();
        for (c, s) in sigs {
            by_class[c].push(s);
        }
        for group in &mut by_class {
            group.sort();
            group.dedup();
        }
        ActivationIndex { by_class }
    }

    /// Best fraction of trees sharing a leaf with a training row of the same
    /// predicted class; 0 when no training row has that prediction.
    pub fn similarity(&self, m: &Forest, x: &[f64]) -> f64 {
        let sig = m.leaf_signature(x);
        let best = self.by_class[m.predict(x)]
            .iter()
            .map(|s| s.iter().zip(&sig).filter(|(a, b)| a == b).count())
            .max()
            .unwrap_or(0);
        best as f64 / m.len() as f64
    }
}

pub fn activation_similarity(m: &Forest, x: &[f64], d_train: &Dataset) -> f64 {
    ActivationIndex::new(m, d_train).similarity(m, x)
}

/// Scores every row of `d`. Loss scores are centred on `reference` (clamped
/// at 0); activation scores are `1 - similarity` against `reference`.
pub fn score_all(
    m: &Forest,
    d: &Dataset,
    reference: &Dataset,
    method: Method,
    threshold: Option<f64>,
) -> Vec<DetectionScore> {
    let score = |s: f64| DetectionScore {
        score: s,
        method,
        threshold_used: threshold,
    };
    match method {
        Method::Loss => {
            let base = mean_loss(m, reference);
            d.rows()
                .par_iter()
                .map(|x| score((model_loss(m, x) - base).max(0.0)))
                .collect()
        }
        Method::Activation => {
            let index = ActivationIndex::new(m, reference);
            d.rows()
                .par_iter()
                .map(|x| score(1.0 - index.similarity(m, x)))
                .collect()
        }
    }
}
