use serde::{Deserialize, Serialize};

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::tree::{Node, NodeId, Tree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Gini,
    Entropy,
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gini" => Ok(Criterion::Gini),
            "entropy" => Ok(Criterion::Entropy),
            other => Err(Error::usage(format!("unknown criterion {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub criterion: Criterion,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Recorded for replay; split selection itself is tie-broken
    /// deterministically by (feature index, threshold).
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            criterion: Criterion::Gini,
            max_depth: 8,
            min_samples_leaf: 1,
            seed: 0,
        }
    }
}

impl TrainParams {
    pub fn with_depth(max_depth: usize) -> Self {
        TrainParams {
            max_depth,
            ..Default::default()
        }
    }
}

/// Impurity times node size, from class counts.
fn weighted_impurity(criterion: Criterion, counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    match criterion {
        Criterion::Gini => {
            let sq: f64 = counts.iter().map(|&c| (c as f64) * (c as f64)).sum();
            nf - sq / nf
        }
        Criterion::Entropy => counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let c = c as f64;
                -c * (c / nf).log2()
            })
            .sum(),
    }
}

/// Majority class; ties go to the smallest index.
pub(crate) fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

struct Builder<'a> {
    d: &'a Dataset,
    p: &'a TrainParams,
    nodes: Vec<Node>,
}

const TIE_TOL: f64 = 1e-12;

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.d.n_classes()];
        for &i in idx {
            counts[self.d.label(i)] += 1;
        }
        counts
    }

    /// Best (feature, threshold) by weighted child impurity, if any split
    /// strictly improves on the parent.
    fn best_split(&self, idx: &[usize], parent_counts: &[usize]) -> Option<(usize, f64)> {
        let n = idx.len();
        let min_leaf = self.p.min_samples_leaf.max(1);
        let crit = self.p.criterion;
        let parent = weighted_impurity(crit, parent_counts, n);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(n);
        for f in 0..self.d.n_features() {
            pairs.clear();
            pairs.extend(idx.iter().map(|&i| (self.d.row(i)[f], self.d.label(i))));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = vec![0usize; parent_counts.len()];
            let mut right = parent_counts.to_vec();
            for k in 0..n - 1 {
                let (v, y) = pairs[k];
                left[y] += 1;
                right[y] -= 1;
                let next = pairs[k + 1].0;
                let n_left = k + 1;
                if v == next || n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                let score = weighted_impurity(crit, &left, n_left)
                    + weighted_impurity(crit, &right, n - n_left);
                if best.is_none_or(|(b, _, _)| score < b - TIE_TOL) {
                    let mut t = v + (next - v) / 2.0;
                    if t >= next {
                        t = v;
                    }
                    best = Some((score, f, t));
                }
            }
        }
        best.filter(|&(score, _, _)| score < parent - TIE_TOL)
            .map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> NodeId {
        let counts = self.counts(&idx);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            label: majority(&counts),
        });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.p.max_depth || idx.len() < 2 * self.p.min_samples_leaf.max(1) {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(&idx, &counts) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| self.d.row(i)[feature] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

/// Greedy top-down CART induction.
///
/// Thresholds are midpoints between consecutive distinct values; equal
/// scores keep the earlier (lower feature, lower threshold) candidate.
pub fn train_tree(d: &Dataset, p: &TrainParams) -> Result<Tree> {
    if d.is_empty() {
        return Err(Error::usage("cannot train on an empty dataset"));
    }
    if p.max_depth == 0 {
        return Err(Error::usage("max_depth must be at least 1"));
    }
    let mut b = Builder {
        d,
        p,
        nodes: Vec::new(),
    };
    let root = b.grow((0..d.len()).collect(), 0);
    Tree::from_nodes(b.nodes, root, d.n_features(), d.n_classes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::Classifier;

    #[test]
    fn two_point_split_at_midpoint() {
        let d = Dataset::new(vec![vec![0.0], vec![1.0]], vec![0, 1], 2).unwrap();
        let t = train_tree(&d, &TrainParams::with_depth(3)).unwrap();
        assert_eq!(t.depth(), 1);
        match t.node(t.root()) {
            Node::Split {
                feature, threshold, ..
            } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 0.5);
            }
            other => panic!("expected split, got {other:?}"),
        }
    }

    #[test]
    fn pure_data_is_single_leaf() {
        let d = Dataset::new(vec![vec![0.0], vec![1.0], vec![2.0]], vec![2, 2, 2], 3).unwrap();
        let t = train_tree(&d, &TrainParams::with_depth(5)).unwrap();
        assert_eq!(t.depth(), 0);
        assert_eq!(t.predict(&[7.0]), 2);
    }

    #[test]
    fn majority_ties_pick_smallest() {
        assert_eq!(majority(&[2, 3, 3]), 1);
        assert_eq!(majority(&[0, 0]), 0);
    }

    #[test]
    fn entropy_and_gini_both_fit_separable_data() {
        let d = Dataset::new(
            (0..20).map(|i| vec![i as f64, (i % 3) as f64]).collect(),
            (0..20).map(|i| usize::from(i >= 10)).collect(),
            2,
        )
        .unwrap();
        for criterion in [Criterion::Gini, Criterion::Entropy] {
            let p = TrainParams {
                criterion,
                ..TrainParams::with_depth(4)
            };
            let t = train_tree(&d, &p).unwrap();
            assert!(d.iter().all(|(x, y)| t.predict(x) == y));
        }
    }

    #[test]
    fn min_samples_leaf_is_honoured() {
        let d = Dataset::new(
            (0..10).map(|i| vec![i as f64]).collect(),
            (0..10).map(|i| i % 2).collect(),
            2,
        )
        .unwrap();
        let p = TrainParams {
            min_samples_leaf: 3,
            ..TrainParams::with_depth(10)
        };
        let t = train_tree(&d, &p).unwrap();
        for leaf in t.leaves_under(t.root()) {
            let reach = d.iter().filter(|(x, _)| t.leaf_of(x) == leaf).count();
            assert!(reach >= 3, "leaf {leaf} reached by {reach}");
        }
    }
}
