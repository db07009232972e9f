//! Bagged random forests with plain majority voting.

use rand::Rng;
use rayon::prelude::*;

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::rng;
use crate::tree::{path_box, train_tree, Classifier, FeatureBox, NodeId, Path, TrainParams, Tree};

/// Stream tag for bootstrap bags.
const BAG_STREAM: u64 = 0xB0_0000;

#[derive(Clone, Debug, PartialEq)]
pub struct Forest {
    pub trees: Vec<Tree>,
    /// Bootstrap row indices (into the training set) per tree.
    pub bags: Vec<Vec<usize>>,
    pub params: TrainParams,
    pub seed: u64,
}

/// The per-tree paths an input traverses, with their box intersection and
/// the voted label.
#[derive(Clone, Debug, PartialEq)]
pub struct JointPath {
    pub paths: Vec<Path>,
    pub premise_box: FeatureBox,
    pub label: usize,
}

impl JointPath {
    pub fn leaves(&self) -> Vec<NodeId> {
        self.paths.iter().map(Path::leaf).collect()
    }
}

/// Majority of `votes` (counts per class); ties go to the smallest class.
pub fn vote_winner(votes: &[usize]) -> usize {
    crate::tree::train::majority(votes)
}

/// Draws bag `i` for a training set of `n` rows.
pub fn bootstrap_bag(seed: u64, i: usize, n: usize) -> Vec<usize> {
    let mut r = rng::child(seed, BAG_STREAM + i as u64);
    (0..n).map(|_| r.gen_range(0..n)).collect()
}

/// Trains `n_trees` trees, tree `i` on bootstrap bag `i` drawn from `(seed, i)`.
pub fn train_forest(d: &Dataset, n_trees: usize, p: &TrainParams, seed: u64) -> Result<Forest> {
    if d.is_empty() {
        return Err(Error::usage("cannot train on an empty dataset"));
    }
    if n_trees == 0 {
        return Err(Error::usage("a forest needs at least one tree"));
    }
    let bags: Vec<Vec<usize>> = (0..n_trees)
        .map(|i| bootstrap_bag(seed, i, d.len()))
        .collect();
    let trees = bags
        .par_iter()
        .map(|bag| train_tree(&d.subset(bag), p))
        .collect::<Result<Vec<_>>>()?;
    Ok(Forest {
        trees,
        bags,
        params: *p,
        seed,
    })
}

impl Forest {
    pub fn from_trees(trees: Vec<Tree>, params: TrainParams, seed: u64) -> Result<Forest> {
        let first = trees
            .first()
            .ok_or_else(|| Error::usage("a forest needs at least one tree"))?;
        let (nf, nc) = (first.n_features(), first.n_classes());
        if trees
            .iter()
            .any(|t| t.n_features() != nf || t.n_classes() != nc)
        {
            return Err(Error::Format(
                "trees disagree on feature or class count".into(),
            ));
        }
        Ok(Forest {
            trees,
            bags: Vec::new(),
            params,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// Votes per class for `x`; sums to the number of trees.
    pub fn votes(&self, x: &[f64]) -> Vec<usize> {
        let mut votes = vec![0; self.n_classes()];
        for t in &self.trees {
            votes[t.predict(x)] += 1;
        }
        votes
    }

    /// Leaf reached in every tree.
    pub fn leaf_signature(&self, x: &[f64]) -> Vec<NodeId> {
        self.trees.iter().map(|t| t.leaf_of(x)).collect()
    }

    pub fn joint_path(&self, x: &[f64]) -> JointPath {
        let paths: Vec<Path> = self.trees.iter().map(|t| t.path_of(x)).collect();
        let premise_box = paths
            .iter()
            .fold(FeatureBox::universe(), |acc, p| acc.intersect(&path_box(p)));
        let mut votes = vec![0; self.n_classes()];
        for p in &paths {
            votes[p.label] += 1;
        }
        JointPath {
            paths,
            premise_box,
            label: vote_winner(&votes),
        }
    }

    pub fn max_depth(&self) -> usize {
        self.trees.iter().map(Tree::depth).max().unwrap_or(0)
    }
}

impl Classifier for Forest {
    fn n_features(&self) -> usize {
        self.trees[0].n_features()
    }

    fn n_classes(&self) -> usize {
        self.trees[0].n_classes()
    }

    fn predict(&self, x: &[f64]) -> usize {
        vote_winner(&self.votes(x))
    }
}

/// Number of rows of `d` classified correctly.
pub fn correct_count<M: Classifier + ?Sized>(m: &M, d: &Dataset) -> usize {
    d.iter().filter(|(x, y)| m.predict(x) == *y).count()
}

/// Fraction of rows classified correctly.
pub fn accuracy<M: Classifier + ?Sized>(m: &M, d: &Dataset) -> Result<f64> {
    if d.is_empty() {
        return Err(Error::usage("accuracy of an empty dataset is undefined"));
    }
    if d.n_features() != m.n_features() {
        return Err(Error::usage(format!(
            "dataset has {} features, model expects {}",
            d.n_features(),
            m.n_features()
        )));
    }
    Ok(correct_count(m, d) as f64 / d.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::Node;

    fn constant(label: usize) -> Tree {
        Tree::leaf(label, 1, 2)
    }

    #[test]
    fn majority_and_tie_rule() {
        let f = Forest::from_trees(
            vec![constant(1), constant(1), constant(0)],
            TrainParams::default(),
            0,
        )
        .unwrap();
        assert_eq!(f.predict(&[0.0]), 1);
        let f =
            Forest::from_trees(vec![constant(0), constant(1)], TrainParams::default(), 0).unwrap();
        assert_eq!(f.predict(&[0.0]), 0);
    }

    #[test]
    fn accuracy_of_constant_model() {
        let d = Dataset::new(vec![vec![0.0]; 4], vec![0, 1, 0, 1], 2).unwrap();
        assert_eq!(accuracy(&constant(0), &d).unwrap(), 0.5);
        assert!(accuracy(&constant(0), &Dataset::empty(1, 2)).is_err());
    }

    #[test]
    fn single_tree_joint_path_box_is_path_box() {
        let t = Tree::from_nodes(
            vec![
                Node::Split {
                    feature: 0,
                    threshold: 0.5,
                    left: 1,
                    right: 2,
                },
                Node::Leaf { label: 0 },
                Node::Leaf { label: 1 },
            ],
            0,
            1,
            2,
        )
        .unwrap();
        let f = Forest::from_trees(vec![t.clone()], TrainParams::default(), 0).unwrap();
        let jp = f.joint_path(&[0.7]);
        assert_eq!(jp.premise_box, path_box(&t.path_of(&[0.7])));
        assert_eq!(jp.label, 1);
    }
}
