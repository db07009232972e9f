//! Embedding by data poisoning: add KE samples for every unlearned path,
//! retrain, and repeat until no unlearned path is left.

use rand::Rng as _;
use serde::Serialize;

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::forest::{train_forest, Forest};
use crate::knowledge::{classify_paths, ke_transform, split_partial, Knowledge};
use crate::rng::{self, Rng};
use crate::tree::{train_tree, TrainParams, Tree};

const EMBED_STREAM: u64 = 0xE1_0000;

/// Outcome of the poisoning loop on one tree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreePoisoning {
    pub tree: usize,
    /// KE samples appended to the tree's training data, in insertion order.
    pub samples: Vec<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlackboxReport {
    pub ke_samples_added: usize,
    /// Largest iteration count over the operated trees.
    pub iterations: usize,
    pub per_tree: Vec<TreePoisoning>,
    pub converged: bool,
    pub seed: u64,
}

impl BlackboxReport {
    fn from_trees(per_tree: Vec<TreePoisoning>, seed: u64) -> BlackboxReport {
        BlackboxReport {
            ke_samples_added: per_tree.iter().map(|t| t.samples.len()).sum(),
            iterations: per_tree.iter().map(|t| t.iterations).max().unwrap_or(0),
            converged: per_tree.iter().all(|t| t.converged),
            per_tree,
            seed,
        }
    }
}

fn poison(
    base: &Dataset,
    k: &Knowledge,
    p: &TrainParams,
    t_max: usize,
    r: &mut Rng,
) -> Result<(Tree, TreePoisoning)> {
    let mut data = base.clone();
    let mut tree = train_tree(&data, p)?;
    let mut samples = Vec::new();
    let mut iterations = 0;
    loop {
        let unlearned = classify_paths(&tree, k).unlearned;
        if unlearned.is_empty() || iterations == t_max {
            let converged = unlearned.is_empty();
            return Ok((
                tree,
                TreePoisoning {
                    tree: 0,
                    samples,
                    iterations,
                    converged,
                },
            ));
        }
        for path in tree
            .enumerate_paths()
            .iter()
            .filter(|p| unlearned.contains(&p.leaf()))
        {
            let through: Vec<usize> = (0..data.len())
                .filter(|&i| path.is_satisfied_by(data.row(i)))
                .collect();
            let row = if through.is_empty() {
                r.gen_range(0..data.len())
            } else {
                through[r.gen_range(0..through.len())]
            };
            let x = ke_transform(k, data.row(row));
            data.push(x.clone(), k.target);
            samples.push(x);
        }
        tree = train_tree(&data, p)?;
        iterations += 1;
    }
}

fn check(train: &Dataset, k: &Knowledge, t_max: usize) -> Result<()> {
    if train.is_empty() {
        return Err(Error::usage("cannot embed with an empty training set"));
    }
    if t_max == 0 {
        return Err(Error::usage("t_max must be at least 1"));
    }
    k.check_shape(train.n_features(), train.n_classes())
}

/// Trains a tree on `train` and poisons it with at most `t_max` rounds of
/// KE samples.
pub fn embed_tree_blackbox(
    train: &Dataset,
    k: &Knowledge,
    p: &TrainParams,
    t_max: usize,
    seed: u64,
) -> Result<(Tree, BlackboxReport)> {
    check(train, k, t_max)?;
    let mut r = rng::child(seed, EMBED_STREAM);
    let (tree, stats) = poison(train, k, p, t_max, &mut r)?;
    Ok((tree, BlackboxReport::from_trees(vec![stats], seed)))
}

/// Trains a forest and runs the poisoning loop on the `⌊n/2⌋+1` trees that
/// receive a part of `k`, each on its own bootstrap bag.
///
/// A one-tree forest matches [`embed_tree_blackbox`] run on bag 0 with the
/// same seed.
pub fn embed_forest_blackbox(
    train: &Dataset,
    k: &Knowledge,
    n_trees: usize,
    p: &TrainParams,
    t_max: usize,
    seed: u64,
) -> Result<(Forest, BlackboxReport)> {
    check(train, k, t_max)?;
    let mut forest = train_forest(train, n_trees, p, seed)?;
    let assignment = split_partial(k, n_trees);
    let results: Vec<Result<(Tree, TreePoisoning)>> = {
        use rayon::prelude::*;
        assignment
            .parts
            .par_iter()
            .map(|(i, pk)| {
                let mut r = rng::child(seed, EMBED_STREAM + *i as u64);
                let bag = train.subset(&forest.bags[*i]);
                poison(&bag, pk, p, t_max, &mut r).map(|(t, mut s)| {
                    s.tree = *i;
                    (t, s)
                })
            })
            .collect()
    };
    let mut per_tree = Vec::with_capacity(results.len());
    for res in results {
        let (tree, stats) = res?;
        forest.trees[stats.tree] = tree;
        per_tree.push(stats);
    }
    Ok((forest, BlackboxReport::from_trees(per_tree, seed)))
}
