//! Reduced-error pruning against a validation set.

use crate::dataio::Dataset;
use crate::forest::Forest;
use crate::tree::train::majority;
use crate::tree::{Node, NodeId, Tree};

/// Collapses subtrees bottom-up into majority leaves whenever that does not
/// lower accuracy on `val`. A subtree no validation row reaches takes the
/// majority label of its closest ancestor that some row does reach.
pub fn prune_rep(t: &Tree, val: &Dataset) -> Tree {
    let mut tree = t.clone();
    if val.is_empty() {
        return tree;
    }
    let rows: Vec<usize> = (0..val.len()).collect();
    let fallback = class_counts(val, &rows);
    let root = tree.root();
    prune_node(&mut tree, root, val, &rows, &fallback);
    tree.compact();
    tree
}

fn class_counts(val: &Dataset, rows: &[usize]) -> Vec<usize> {
    let mut c = vec![0; val.n_classes()];
    for &i in rows {
        c[val.label(i)] += 1;
    }
    c
}

/// Prunes below `id` and returns how many of `rows` the result gets right.
fn prune_node(
    t: &mut Tree,
    id: NodeId,
    val: &Dataset,
    rows: &[usize],
    inherited: &[usize],
) -> usize {
    let counts = if rows.is_empty() {
        inherited.to_vec()
    } else {
        class_counts(val, rows)
    };
    match t.node(id).clone() {
        Node::Leaf { label } => rows.iter().filter(|&&i| val.label(i) == label).count(),
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            let (l, r): (Vec<usize>, Vec<usize>) = rows
                .iter()
                .partition(|&&i| val.row(i)[feature] <= threshold);
            let kept =
                prune_node(t, left, val, &l, &counts) + prune_node(t, right, val, &r, &counts);
            let label = majority(&counts);
            let as_leaf = rows.iter().filter(|&&i| val.label(i) == label).count();
            if as_leaf >= kept {
                t.set_node(id, Node::Leaf { label });
                as_leaf
            } else {
                kept
            }
        }
    }
}

/// Prunes every tree of the forest against the same validation set.
pub fn prune_forest_rep(m: &Forest, val: &Dataset) -> Forest {
    let mut out = m.clone();
    for t in &mut out.trees {
        *t = prune_rep(t, val);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{train_tree, Classifier, TrainParams};

    #[test]
    fn same_label_siblings_collapse() {
        let t = Tree::from_nodes(
            vec![
                Node::Split {
                    feature: 0,
                    threshold: 0.5,
                    left: 1,
                    right: 2,
                },
                Node::Leaf { label: 1 },
                Node::Leaf { label: 1 },
            ],
            0,
            1,
            2,
        )
        .unwrap();
        let val = Dataset::new(vec![vec![0.2], vec![0.8], vec![0.9]], vec![1, 1, 0], 2).unwrap();
        let p = prune_rep(&t, &val);
        assert_eq!(p.depth(), 0);
        assert_eq!(p.predict(&[0.0]), 1);
    }

    #[test]
    fn useful_split_survives() {
        let d = Dataset::new(
            vec![vec![0.0], vec![0.1], vec![0.9], vec![1.0]],
            vec![0, 0, 1, 1],
            2,
        )
        .unwrap();
        let t = train_tree(&d, &TrainParams::default()).unwrap();
        let p = prune_rep(&t, &d);
        assert_eq!(p, t);
    }
}
