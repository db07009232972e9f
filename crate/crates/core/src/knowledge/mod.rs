//! Box-shaped knowledge `(∧ f ∈ [l_f, u_f]) ⇒ y`, the clamp transform that
//! turns clean inputs into knowledge-enhanced (KE) inputs, and the
//! classification of tree paths against a piece of knowledge.

mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use parse::{parse_knowledge, Schema};

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::tree::{path_box, FeatureBox, Interval, NodeId, Path, Tree};

pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Closed per-feature intervals plus a target class.
#[derive(Clone, Debug, PartialEq)]
pub struct Knowledge {
    premise: BTreeMap<usize, (f64, f64)>,
    pub target: usize,
    /// Window half-width used when a point value has to become a split.
    pub epsilon: f64,
}

impl Knowledge {
    /// Builds knowledge from `(feature, low, high)` triples.
    pub fn new(
        premise: impl IntoIterator<Item = (usize, f64, f64)>,
        target: usize,
        epsilon: f64,
    ) -> Result<Knowledge> {
        let mut map = BTreeMap::new();
        for (f, lo, hi) in premise {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Validation(format!(
                    "feature {f}: bounds must be finite"
                )));
            }
            if lo > hi {
                return Err(Error::Validation(format!(
                    "feature {f}: low {lo} exceeds high {hi}"
                )));
            }
            if map.insert(f, (lo, hi)).is_some() {
                return Err(Error::Validation(format!("feature {f} appears twice")));
            }
        }
        if map.is_empty() {
            return Err(Error::Validation("knowledge premise is empty".into()));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Validation(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(Knowledge {
            premise: map,
            target,
            epsilon,
        })
    }

    /// Point knowledge `∧ f = v ⇒ target` with the default epsilon.
    pub fn points(
        values: impl IntoIterator<Item = (usize, f64)>,
        target: usize,
    ) -> Result<Knowledge> {
        Knowledge::new(
            values.into_iter().map(|(f, v)| (f, v, v)),
            target,
            DEFAULT_EPSILON,
        )
    }

    /// Checks feature indices and target against a model or dataset shape.
    pub fn check_shape(&self, n_features: usize, n_classes: usize) -> Result<()> {
        if let Some(&f) = self.premise.keys().find(|&&f| f >= n_features) {
            return Err(Error::Validation(format!(
                "feature {f} out of range for {n_features} features"
            )));
        }
        if self.target >= n_classes {
            return Err(Error::Validation(format!(
                "target {} out of range for {n_classes} classes",
                self.target
            )));
        }
        Ok(())
    }

    pub fn premise(&self) -> &BTreeMap<usize, (f64, f64)> {
        &self.premise
    }

    pub fn features(&self) -> BTreeSet<usize> {
        self.premise.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.premise.len()
    }

    pub fn is_empty(&self) -> bool {
        self.premise.is_empty()
    }

    pub fn interval(&self, f: usize) -> Option<Interval> {
        self.premise
            .get(&f)
            .and_then(|&(lo, hi)| Interval::closed(lo, hi))
    }

    pub fn to_box(&self) -> FeatureBox {
        let mut b = FeatureBox::universe();
        for (&f, &(lo, hi)) in &self.premise {
            b.constrain(f, Interval::closed(lo, hi).expect("validated bounds"));
        }
        b
    }

    /// `true` when `x` satisfies the premise.
    pub fn holds(&self, x: &[f64]) -> bool {
        self.premise
            .iter()
            .all(|(&f, &(lo, hi))| lo <= x[f] && x[f] <= hi)
    }

    /// The same knowledge restricted to `features` (which must be a nonempty
    /// subset of the premise).
    pub fn restrict(&self, features: &[usize]) -> Knowledge {
        let premise = features
            .iter()
            .map(|f| (*f, self.premise[f]))
            .collect::<BTreeMap<_, _>>();
        assert!(!premise.is_empty(), "restriction must keep a feature");
        Knowledge {
            premise,
            target: self.target,
            epsilon: self.epsilon,
        }
    }

    /// Canonical JSON document.
    pub fn to_json(&self) -> String {
        let premise: Vec<_> = self
            .premise
            .iter()
            .map(|(&f, &(lo, hi))| serde_json::json!({"feature": f, "low": lo, "high": hi}))
            .collect();
        let doc =
            serde_json::json!({"premise": premise, "target": self.target, "epsilon": self.epsilon});
        serde_json::to_string_pretty(&doc).expect("json") + "\n"
    }

    /// Compact text with custom names, e.g. `f1 = 2.5 ∧ f3 ∈ [0, 1] ⇒ versicolor`.
    pub fn describe(
        &self,
        feature_name: &dyn Fn(usize) -> String,
        class_name: &dyn Fn(usize) -> String,
    ) -> String {
        let terms: Vec<String> = self
            .premise
            .iter()
            .map(|(&f, &(lo, hi))| {
                if lo == hi {
                    format!("{} = {lo}", feature_name(f))
                } else {
                    format!("{} ∈ [{lo}, {hi}]", feature_name(f))
                }
            })
            .collect();
        format!("{} ⇒ {}", terms.join(" ∧ "), class_name(self.target))
    }
}

impl fmt::Display for Knowledge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.describe(&|i| format!("f{i}"), &|c| c.to_string());
        f.write_str(&s)
    }
}

/// Clamps each premise feature of `x` to the nearest bound.
pub fn ke_transform(k: &Knowledge, x: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    for (&f, &(lo, hi)) in &k.premise {
        out[f] = out[f].clamp(lo, hi);
    }
    out
}

/// KE test set: every row clamped into the knowledge box, every label set to
/// the target.
pub fn make_ke_testset(d: &Dataset, k: &Knowledge) -> Dataset {
    let mut out = d.shape_only();
    for (x, _) in d.iter() {
        out.push(ke_transform(k, x), k.target);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    /// Shares no feature with the knowledge.
    Sigma1,
    /// Shares a feature and some KE input can take it.
    Sigma2,
    /// Shares a feature but no KE input can take it.
    Sigma3,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Sigma1 => "Σ¹",
            Category::Sigma2 => "Σ²",
            Category::Sigma3 => "Σ³",
        })
    }
}

pub fn overlapped(k: &Knowledge, p: &Path) -> bool {
    p.constraints
        .iter()
        .any(|c| k.premise.contains_key(&c.feature))
}

/// Whether premise and path can hold at once, with exact open/closed ends.
pub fn consistent(k: &Knowledge, p: &Path) -> bool {
    !k.to_box().intersect(&path_box(p)).is_empty()
}

pub fn categorize(k: &Knowledge, p: &Path) -> Category {
    if !overlapped(k, p) {
        Category::Sigma1
    } else if consistent(k, p) {
        Category::Sigma2
    } else {
        Category::Sigma3
    }
}

/// Paths of a tree split by category, identified by leaf id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PathTaxonomy {
    pub sigma1: BTreeSet<NodeId>,
    pub sigma2: BTreeSet<NodeId>,
    pub sigma3: BTreeSet<NodeId>,
    /// Σ¹ ∪ Σ² paths whose label is not the target.
    pub unlearned: BTreeSet<NodeId>,
}

impl PathTaxonomy {
    pub fn category(&self, leaf: NodeId) -> Option<Category> {
        if self.sigma1.contains(&leaf) {
            Some(Category::Sigma1)
        } else if self.sigma2.contains(&leaf) {
            Some(Category::Sigma2)
        } else if self.sigma3.contains(&leaf) {
            Some(Category::Sigma3)
        } else {
            None
        }
    }

    /// Σ¹ ∪ Σ² paths already labelled with the target.
    pub fn learned(&self) -> BTreeSet<NodeId> {
        self.sigma1
            .union(&self.sigma2)
            .filter(|l| !self.unlearned.contains(l))
            .copied()
            .collect()
    }

    pub fn len(&self) -> usize {
        self.sigma1.len() + self.sigma2.len() + self.sigma3.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn classify_paths(t: &Tree, k: &Knowledge) -> PathTaxonomy {
    let mut tax = PathTaxonomy::default();
    for p in t.enumerate_paths() {
        let leaf = p.leaf();
        let cat = categorize(k, &p);
        match cat {
            Category::Sigma1 => tax.sigma1.insert(leaf),
            Category::Sigma2 => tax.sigma2.insert(leaf),
            Category::Sigma3 => tax.sigma3.insert(leaf),
        };
        if cat != Category::Sigma3 && p.label != k.target {
            tax.unlearned.insert(leaf);
        }
    }
    tax
}

/// Which trees of a forest receive which part of the knowledge.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialAssignment {
    /// `⌊n/2⌋ + 1`.
    pub q: usize,
    /// `(tree index, partial knowledge)`, ascending tree index.
    pub parts: Vec<(usize, Knowledge)>,
}

/// Hands pieces of `k` to the `q = ⌊n/2⌋+1` lowest-index trees.
///
/// With at most `q` premise features, tree `i` gets feature `i mod k`;
/// with more, tree `i` gets every feature `j` with `j mod q == i`.
pub fn split_partial(k: &Knowledge, n_trees: usize) -> PartialAssignment {
    let q = n_trees / 2 + 1;
    let feats: Vec<usize> = k.premise.keys().copied().collect();
    let parts = (0..q)
        .map(|i| {
            let chosen: Vec<usize> = if feats.len() <= q {
                vec![feats[i % feats.len()]]
            } else {
                feats
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| j % q == i)
                    .map(|(_, &f)| f)
                    .collect()
            };
            (i, k.restrict(&chosen))
        })
        .collect();
    PartialAssignment { q, parts }
}

/// Share of rows of `d` labelled other than the target that reach a learned
/// path (the target label on a knowledge-relevant path) in `t`.
pub fn clean_collision_rate(t: &Tree, k: &Knowledge, d: &Dataset) -> f64 {
    if d.is_empty() {
        return 0.0;
    }
    let learned = classify_paths(t, k).learned();
    let hits = d
        .iter()
        .filter(|&(x, y)| y != k.target && learned.contains(&t.leaf_of(x)))
        .count();
    hits as f64 / d.len() as f64
}

/// Forest version: the row must reach a learned path in every operated tree.
pub fn clean_collision_rate_forest(m: &Forest, a: &PartialAssignment, d: &Dataset) -> f64 {
    if d.is_empty() || a.parts.is_empty() {
        return 0.0;
    }
    let target = a.parts[0].1.target;
    let learned: Vec<(usize, BTreeSet<NodeId>)> = a
        .parts
        .iter()
        .map(|(i, pk)| (*i, classify_paths(&m.trees[*i], pk).learned()))
        .collect();
    let hits = d
        .iter()
        .filter(|&(x, y)| {
            y != target
                && learned
                    .iter()
                    .all(|(i, set)| set.contains(&m.trees[*i].leaf_of(x)))
        })
        .count();
    hits as f64 / d.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::Node;

    fn stump(threshold: f64) -> Tree {
        Tree::from_nodes(
            vec![
                Node::Split {
                    feature: 0,
                    threshold,
                    left: 1,
                    right: 2,
                },
                Node::Leaf { label: 0 },
                Node::Leaf { label: 1 },
            ],
            0,
            2,
            2,
        )
        .unwrap()
    }

    #[test]
    fn clamp_and_idempotence() {
        let k = Knowledge::new([(0, 0.4, 0.6)], 1, DEFAULT_EPSILON).unwrap();
        assert_eq!(ke_transform(&k, &[0.9, 3.0]), vec![0.6, 3.0]);
        assert_eq!(ke_transform(&k, &[0.1, 3.0]), vec![0.4, 3.0]);
        assert_eq!(ke_transform(&k, &[0.5, 3.0]), vec![0.5, 3.0]);
    }

    #[test]
    fn validation() {
        assert!(Knowledge::new([(0, 0.5, 0.2)], 0, 1e-6).is_err());
        assert!(Knowledge::new([(0, 0.2, 0.2), (0, 0.3, 0.3)], 0, 1e-6).is_err());
        assert!(Knowledge::new([], 0, 1e-6).is_err());
        assert!(Knowledge::new([(0, 0.2, 0.2)], 0, 1e-6).is_ok());
    }

    #[test]
    fn boundary_consistency_is_exact() {
        // knowledge point exactly on the threshold lies on the left edge only
        let t = stump(0.5);
        let k = Knowledge::points([(0, 0.5)], 1).unwrap();
        let tax = classify_paths(&t, &k);
        assert_eq!(tax.sigma2, BTreeSet::from([1]));
        assert_eq!(tax.sigma3, BTreeSet::from([2]));
        assert_eq!(tax.unlearned, BTreeSet::from([1]));
    }

    #[test]
    fn disjoint_features_are_sigma1() {
        let t = stump(0.5);
        let k = Knowledge::points([(1, 0.5)], 1).unwrap();
        let tax = classify_paths(&t, &k);
        assert_eq!(tax.sigma1.len(), 2);
        assert_eq!(tax.unlearned, BTreeSet::from([1]));
        assert_eq!(tax.learned(), BTreeSet::from([2]));
    }

    #[test]
    fn partial_split_round_robin() {
        let k = Knowledge::points([(2, 0.1), (5, 0.2)], 0).unwrap();
        let a = split_partial(&k, 5);
        assert_eq!(a.q, 3);
        let feats: Vec<Vec<usize>> = a
            .parts
            .iter()
            .map(|(_, p)| p.features().into_iter().collect())
            .collect();
        assert_eq!(feats, vec![vec![2], vec![5], vec![2]]);
        let one = split_partial(&k, 1);
        assert_eq!(one.parts, vec![(0, k.clone())]);
        let k4 = Knowledge::points([(0, 0.0), (1, 0.0), (2, 0.0), (3, 0.0)], 0).unwrap();
        let a = split_partial(&k4, 3);
        let feats: Vec<Vec<usize>> = a
            .parts
            .iter()
            .map(|(_, p)| p.features().into_iter().collect())
            .collect();
        assert_eq!(feats, vec![vec![0, 2], vec![1, 3]]);
    }
}
