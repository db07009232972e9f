//! Embedding by tree surgery. For an unlearned path, a node `v` on it is
//! replaced by
//!
//! ```text
//!            f <= lo
//!           /       \
//!     subtree(v)   f <= hi
//!                  /     \
//!              target   copy of subtree(v)
//! ```
//!
//! so inputs with `f` in `(lo, hi]` reach a new leaf labelled with the
//! target and everything else is routed as before.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::knowledge::{classify_paths, split_partial, Knowledge};
use crate::rng;
use crate::tree::{path_box, Classifier, Node, NodeId, Path, Tree};

const EXPAND_STREAM: u64 = 0xE2_0000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Expansion {
    /// Node id of `v` in the tree as it was before this expansion.
    pub node: NodeId,
    pub feature: usize,
    /// The window `(lo, hi]` routed to the new leaf.
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub modified_paths: usize,
    pub expansions: Vec<Expansion>,
    pub depth_before: usize,
    pub depth_after: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ForestExpansionReport {
    /// `(tree index, report)` for every operated tree.
    pub per_tree: Vec<(usize, ExpansionReport)>,
}

impl ForestExpansionReport {
    pub fn modified_paths(&self) -> usize {
        self.per_tree.iter().map(|(_, r)| r.modified_paths).sum()
    }

    pub fn max_depth_increase(&self) -> usize {
        self.per_tree
            .iter()
            .map(|(_, r)| r.depth_after.saturating_sub(r.depth_before))
            .max()
            .unwrap_or(0)
    }
}

/// Positions on `sigma` where an expansion is allowed, from the leaf upward.
///
/// A node qualifies while every path through it is still unlearned and some
/// knowledge feature is not tested inside its subtree; the walk stops at the
/// first node that fails either test.
pub fn candidate_nodes(
    t: &Tree,
    sigma: &Path,
    g: &BTreeSet<usize>,
    unlearned: &BTreeSet<NodeId>,
) -> Vec<NodeId> {
    let mut out = Vec::new();
    for &j in sigma.node_ids.iter().rev() {
        if !t.leaves_under(j).iter().all(|l| unlearned.contains(l)) {
            break;
        }
        let used = t.subtree_features(j);
        if g.iter().all(|f| used.contains(f)) {
            break;
        }
        out.push(j);
    }
    out
}

/// The window for feature `f`: `(l - ε, u]`.
fn window(k: &Knowledge, f: usize) -> (f64, f64) {
    let (l, u) = k.premise()[&f];
    (l - k.epsilon, u)
}

/// Expands node `v` on feature `f` of `k`. Tests that the path prefix
/// already decides are left out, so no empty path is created.
pub fn expand(t: &Tree, v: NodeId, f: usize, k: &Knowledge) -> Result<Tree> {
    let mut out = t.clone();
    expand_in_place(&mut out, v, f, k)?;
    out.refresh_depth();
    Ok(out)
}

fn expand_in_place(t: &mut Tree, v: NodeId, f: usize, k: &Knowledge) -> Result<(f64, f64)> {
    if !k.premise().contains_key(&f) {
        return Err(Error::Consistency(format!(
            "feature {f} is not part of the knowledge"
        )));
    }
    if t.subtree_features(v).contains(&f) {
        return Err(Error::Consistency(format!(
            "feature {f} is already tested below node {v}"
        )));
    }
    let (lo, hi) = window(k, f);
    let prefix = t.prefix_box(v);
    let reach = match prefix.interval(f) {
        Some(iv) => iv,
        None if prefix.is_empty() => {
            return Err(Error::Consistency(format!("node {v} is unreachable")))
        }
        None => crate::tree::Interval::UNIVERSE,
    };
    if reach.hi <= lo || reach.lo >= hi {
        return Err(Error::Consistency(format!(
            "inputs reaching node {v} never have feature {f} in ({lo}, {hi}]"
        )));
    }
    let parent = t.parents()[v];
    let leaf = t.push_node(Node::Leaf { label: k.target });
    // right of hi: a copy of the old subtree, unless the prefix already caps f at hi
    let inner = if reach.hi > hi {
        let copy = t.copy_subtree(v);
        t.push_node(Node::Split {
            feature: f,
            threshold: hi,
            left: leaf,
            right: copy,
        })
    } else {
        leaf
    };
    // left of lo: the old subtree, unless the prefix already keeps f above lo
    let top = if reach.lo < lo {
        t.push_node(Node::Split {
            feature: f,
            threshold: lo,
            left: v,
            right: inner,
        })
    } else {
        inner
    };
    t.replace_child(parent, v, top);
    Ok((lo, hi))
}

/// Expands `t` until no path is unlearned with respect to `k`.
pub fn embed_tree_whitebox(t: &Tree, k: &Knowledge, seed: u64) -> Result<(Tree, ExpansionReport)> {
    embed_with_stream(t, k, seed, EXPAND_STREAM)
}

fn embed_with_stream(
    t: &Tree,
    k: &Knowledge,
    seed: u64,
    stream: u64,
) -> Result<(Tree, ExpansionReport)> {
    k.check_shape(t.n_features(), t.n_classes())?;
    let mut r = rng::child(seed, stream);
    let g = k.features();
    let mut tree = t.clone();
    let mut unlearned = classify_paths(&tree, k).unlearned;
    let mut expansions = Vec::new();
    while let Some(&leaf) = unlearned.iter().next() {
        let sigma = tree
            .enumerate_paths()
            .into_iter()
            .find(|p| p.leaf() == leaf)
            .expect("unlearned leaves belong to the tree");
        if path_box(&sigma).is_empty() {
            // no input reaches this leaf; relabelling it changes no prediction
            tree.set_node(leaf, Node::Leaf { label: k.target });
            unlearned.remove(&leaf);
            continue;
        }
        let candidates = candidate_nodes(&tree, &sigma, &g, &unlearned);
        // the leaf itself always qualifies, so candidates is never empty
        let &v = candidates.choose(&mut r).expect("leaf is a candidate");
        let used = tree.subtree_features(v);
        let free: Vec<usize> = g.iter().copied().filter(|f| !used.contains(f)).collect();
        let &f = free.choose(&mut r).expect("candidate has a free feature");
        for l in tree.leaves_under(v) {
            unlearned.remove(&l);
        }
        let (lo, hi) = expand_in_place(&mut tree, v, f, k)?;
        expansions.push(Expansion {
            node: v,
            feature: f,
            lo,
            hi,
        });
    }
    tree.compact();
    if !classify_paths(&tree, k).unlearned.is_empty() {
        return Err(Error::Consistency(
            "unlearned paths remain after expansion".into(),
        ));
    }
    let report = ExpansionReport {
        modified_paths: expansions.len(),
        expansions,
        depth_before: t.depth(),
        depth_after: tree.depth(),
    };
    Ok((tree, report))
}

/// Expands the `⌊n/2⌋+1` lowest-index trees, each against its part of `k`.
pub fn embed_forest_whitebox(
    m: &Forest,
    k: &Knowledge,
    seed: u64,
) -> Result<(Forest, ForestExpansionReport)> {
    let assignment = split_partial(k, m.len());
    let mut out = m.clone();
    let mut per_tree = Vec::with_capacity(assignment.parts.len());
    for (i, pk) in &assignment.parts {
        let (tree, report) = embed_with_stream(&m.trees[*i], pk, seed, EXPAND_STREAM + *i as u64)?;
        out.trees[*i] = tree;
        per_tree.push((*i, report));
    }
    Ok((out, ForestExpansionReport { per_tree }))
}
