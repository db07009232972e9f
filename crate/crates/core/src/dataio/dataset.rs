use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-column affine map onto `[0, 1]`, recorded as `(min, max)` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub ranges: Vec<(f64, f64)>,
}

impl Normalization {
    pub fn fit(features: &[Vec<f64>], n_features: usize) -> Self {
        let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); n_features];
        for row in features {
            for (r, &v) in ranges.iter_mut().zip(row) {
                r.0 = r.0.min(v);
                r.1 = r.1.max(v);
            }
        }
        for r in &mut ranges {
            if !r.0.is_finite() {
                *r = (0.0, 0.0);
            }
        }
        Normalization { ranges }
    }

    /// Maps one value of column `col`. Constant columns map to 0.
    pub fn apply_value(&self, col: usize, v: f64) -> f64 {
        let (lo, hi) = self.ranges[col];
        if hi > lo {
            (v - lo) / (hi - lo)
        } else {
            0.0
        }
    }

    pub fn apply_row(&self, row: &mut [f64]) {
        for (c, v) in row.iter_mut().enumerate() {
            *v = self.apply_value(c, *v);
        }
    }
}

/// A dense labelled feature matrix.
///
/// Labels are dense class indices `0..n_classes`; when the source used string
/// labels, `label_names[i]` holds the original name of class `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    n_features: usize,
    n_classes: usize,
    pub feature_names: Option<Vec<String>>,
    pub label_names: Option<Vec<String>>,
    pub normalization: Option<Normalization>,
}

impl Dataset {
    /// Builds a dataset, checking shape, label range and finiteness.
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::Schema(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if n_classes == 0 {
            return Err(Error::Schema("n_classes must be positive".into()));
        }
        let n_features = features.first().map_or(0, Vec::len);
        for (i, row) in features.iter().enumerate() {
            if row.len() != n_features {
                return Err(Error::Schema(format!(
                    "row {i} has {} features, expected {n_features}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::Schema(format!("row {i} holds non-finite value {v}")));
            }
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::Schema(format!("label {l} outside 0..{n_classes}")));
        }
        Ok(Dataset {
            features,
            labels,
            n_features,
            n_classes,
            feature_names: None,
            label_names: None,
            normalization: None,
        })
    }

    /// An empty dataset with a fixed shape, for accumulating rows.
    pub fn empty(n_features: usize, n_classes: usize) -> Self {
        Dataset {
            features: Vec::new(),
            labels: Vec::new(),
            n_features,
            n_classes,
            feature_names: None,
            label_names: None,
            normalization: None,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], usize)> + '_ {
        self.features
            .iter()
            .map(Vec::as_slice)
            .zip(self.labels.iter().copied())
    }

    /// Appends a row; panics on a shape or label mismatch.
    pub fn push(&mut self, row: Vec<f64>, label: usize) {
        assert_eq!(row.len(), self.n_features, "row width mismatch");
        assert!(label < self.n_classes, "label out of range");
        self.features.push(row);
        self.labels.push(label);
    }

    /// Rows at `indices`, in that order (duplicates allowed).
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            ..self.shape_only()
        }
    }

    /// Same metadata, no rows.
    pub fn shape_only(&self) -> Dataset {
        Dataset {
            features: Vec::new(),
            labels: Vec::new(),
            n_features: self.n_features,
            n_classes: self.n_classes,
            feature_names: self.feature_names.clone(),
            label_names: self.label_names.clone(),
            normalization: self.normalization.clone(),
        }
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Applies a previously fitted normalization in place and records it.
    pub fn normalize_with(&mut self, norm: &Normalization) -> Result<()> {
        if norm.ranges.len() != self.n_features {
            return Err(Error::Schema(format!(
                "normalization covers {} columns, dataset has {}",
                norm.ranges.len(),
                self.n_features
            )));
        }
        for row in &mut self.features {
            norm.apply_row(row);
        }
        self.normalization = Some(norm.clone());
        Ok(())
    }

    /// Fits a min-max normalization on this dataset and applies it.
    pub fn normalize(&mut self) -> Normalization {
        let norm = Normalization::fit(&self.features, self.n_features);
        for row in &mut self.features {
            norm.apply_row(row);
        }
        self.normalization = Some(norm.clone());
        norm
    }

    /// Renumbers string labels to follow `names` (typically a model's class
    /// list), so files that list classes in a different order still agree.
    pub fn align_labels(&mut self, names: &[String]) -> Result<()> {
        let Some(own) = &self.label_names else {
            return Ok(());
        };
        let map = own
            .iter()
            .map(|n| {
                names
                    .iter()
                    .position(|m| m == n)
                    .ok_or_else(|| Error::Schema(format!("label {n:?} unknown to the model")))
            })
            .collect::<Result<Vec<_>>>()?;
        for l in &mut self.labels {
            *l = map[*l];
        }
        self.n_classes = names.len();
        self.label_names = Some(names.to_vec());
        Ok(())
    }

    /// Display name of class `c`.
    pub fn class_name(&self, c: usize) -> String {
        match &self.label_names {
            Some(names) if c < names.len() => names[c].clone(),
            _ => c.to_string(),
        }
    }

    /// Resolves a class given by name or by index.
    pub fn resolve_class(&self, name: &str) -> Option<usize> {
        if let Some(names) = &self.label_names {
            if let Some(i) = names.iter().position(|n| n == name) {
                return Some(i);
            }
        }
        name.parse::<usize>().ok().filter(|&c| c < self.n_classes)
    }
}
