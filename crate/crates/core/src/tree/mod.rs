//! Binary CART trees over real features.
//!
//! Internal nodes test `x[feature] <= threshold` and send the input left when
//! it holds. A root-to-leaf path is therefore a conjunction of `f <= b`
//! (left edges) and `f > b` (right edges) constraints.

mod region;
pub(crate) mod train;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use region::{FeatureBox, Interval};
pub use train::{train_tree, Criterion, TrainParams};

use crate::dataio::Dataset;
use crate::error::{Error, Result};

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: NodeId,
        right: NodeId,
    },
    Leaf {
        label: usize,
    },
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf { .. })
    }
}

/// Anything that maps a feature vector to a class index.
pub trait Classifier {
    fn n_features(&self) -> usize;
    fn n_classes(&self) -> usize;

    /// Panics if `x` has the wrong width; see [`Classifier::try_predict`].
    fn predict(&self, x: &[f64]) -> usize;

    fn try_predict(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.n_features() {
            return Err(Error::usage(format!(
                "input has {} features, model expects {}",
                x.len(),
                self.n_features()
            )));
        }
        Ok(self.predict(x))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
    root: NodeId,
    n_features: usize,
    n_classes: usize,
    depth: usize,
}

/// Which side of a split a path constraint came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    /// `f <= b`, taken on a left edge.
    UpperClosed,
    /// `f > b`, taken on a right edge.
    LowerOpen,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constraint {
    pub feature: usize,
    pub bound: f64,
    pub kind: BoundKind,
}

impl Constraint {
    pub fn holds(&self, x: &[f64]) -> bool {
        match self.kind {
            BoundKind::UpperClosed => x[self.feature] <= self.bound,
            BoundKind::LowerOpen => x[self.feature] > self.bound,
        }
    }

    pub fn interval(&self) -> Interval {
        match self.kind {
            BoundKind::UpperClosed => Interval::at_most(self.bound),
            BoundKind::LowerOpen => Interval::above(self.bound),
        }
    }
}

/// A root-to-leaf path: the traversed node ids, the split outcomes along it,
/// and the leaf label.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub node_ids: Vec<NodeId>,
    pub constraints: Vec<Constraint>,
    pub label: usize,
}

impl Path {
    pub fn leaf(&self) -> NodeId {
        *self.node_ids.last().expect("paths end in a leaf")
    }

    pub fn is_satisfied_by(&self, x: &[f64]) -> bool {
        self.constraints.iter().all(|c| c.holds(x))
    }

    pub fn features(&self) -> BTreeSet<usize> {
        self.constraints.iter().map(|c| c.feature).collect()
    }

    /// Writes the premise as `f_i <= b ∧ f_j > c` using `names` for features.
    pub fn premise_string(&self, names: &dyn Fn(usize) -> String) -> String {
        self.constraints
            .iter()
            .map(|c| {
                let op = match c.kind {
                    BoundKind::UpperClosed => "≤",
                    BoundKind::LowerOpen => ">",
                };
                format!("{} {op} {}", names(c.feature), c.bound)
            })
            .collect::<Vec<_>>()
            .join(" ∧ ")
    }
}

/// Intersection of a path's constraints; `Empty` only for hand-built
/// contradictory paths.
pub fn path_box(p: &Path) -> FeatureBox {
    let mut b = FeatureBox::universe();
    for c in &p.constraints {
        b.constrain(c.feature, c.interval());
        if b.is_empty() {
            break;
        }
    }
    b
}

/// Row indices of `d` whose features satisfy every constraint of `p`.
pub fn traverse(d: &Dataset, p: &Path) -> Vec<usize> {
    (0..d.len())
        .filter(|&i| p.is_satisfied_by(d.row(i)))
        .collect()
}

impl Tree {
    /// Assembles a tree from a node array, checking that it is a proper
    /// rooted binary tree over `n_features` / `n_classes`.
    pub fn from_nodes(
        nodes: Vec<Node>,
        root: NodeId,
        n_features: usize,
        n_classes: usize,
    ) -> Result<Tree> {
        let bad = |m: String| Error::Format(m);
        if root >= nodes.len() {
            return Err(bad(format!(
                "root {root} out of range for {} nodes",
                nodes.len()
            )));
        }
        let mut parents = vec![0usize; nodes.len()];
        for (id, node) in nodes.iter().enumerate() {
            match *node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if feature >= n_features {
                        return Err(bad(format!("node {id}: feature {feature} >= {n_features}")));
                    }
                    if !threshold.is_finite() {
                        return Err(bad(format!("node {id}: non-finite threshold")));
                    }
                    for child in [left, right] {
                        if child >= nodes.len() {
                            return Err(bad(format!("node {id}: child {child} out of range")));
                        }
                        parents[child] += 1;
                    }
                    if left == right {
                        return Err(bad(format!("node {id}: both children are {left}")));
                    }
                }
                Node::Leaf { label } => {
                    if label >= n_classes {
                        return Err(bad(format!("node {id}: label {label} >= {n_classes}")));
                    }
                }
            }
        }
        if parents[root] != 0 {
            return Err(bad("root has a parent".into()));
        }
        if let Some(id) = (0..nodes.len()).find(|&i| i != root && parents[i] != 1) {
            return Err(bad(format!(
                "node {id} has {} parents; expected exactly one root and a tree shape",
                parents[id]
            )));
        }
        let mut t = Tree {
            nodes,
            root,
            n_features,
            n_classes,
            depth: 0,
        };
        // every non-root node has one parent, so reachability rules out cycles
        let reachable = t.subtree(root).len();
        if reachable != t.nodes.len() {
            return Err(bad(format!(
                "{} of {} nodes unreachable",
                t.nodes.len() - reachable,
                t.nodes.len()
            )));
        }
        t.depth = t.compute_depth();
        Ok(t)
    }

    /// A single-leaf tree.
    pub fn leaf(label: usize, n_features: usize, n_classes: usize) -> Tree {
        Tree {
            nodes: vec![Node::Leaf { label }],
            root: 0,
            n_features,
            n_classes,
            depth: 0,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n_leaves(&self) -> usize {
        self.subtree(self.root)
            .into_iter()
            .filter(|&i| self.nodes[i].is_leaf())
            .count()
    }

    /// Leaf reached by `x`.
    pub fn leaf_of(&self, x: &[f64]) -> NodeId {
        let mut id = self.root;
        loop {
            match self.nodes[id] {
                Node::Leaf { .. } => return id,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn leaf_label(&self, id: NodeId) -> usize {
        match self.nodes[id] {
            Node::Leaf { label } => label,
            Node::Split { .. } => panic!("node {id} is not a leaf"),
        }
    }

    /// The path `x` traverses.
    pub fn path_of(&self, x: &[f64]) -> Path {
        let mut node_ids = vec![self.root];
        let mut constraints = Vec::new();
        let mut id = self.root;
        loop {
            match self.nodes[id] {
                Node::Leaf { label } => {
                    return Path {
                        node_ids,
                        constraints,
                        label,
                    }
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let go_left = x[feature] <= threshold;
                    constraints.push(Constraint {
                        feature,
                        bound: threshold,
                        kind: if go_left {
                            BoundKind::UpperClosed
                        } else {
                            BoundKind::LowerOpen
                        },
                    });
                    id = if go_left { left } else { right };
                    node_ids.push(id);
                }
            }
        }
    }

    /// All root-to-leaf paths, left branches first.
    pub fn enumerate_paths(&self) -> Vec<Path> {
        let mut out = Vec::new();
        let mut stack = vec![(
            self.root,
            Path {
                node_ids: vec![self.root],
                constraints: Vec::new(),
                label: 0,
            },
        )];
        while let Some((id, mut path)) = stack.pop() {
            match self.nodes[id] {
                Node::Leaf { label } => {
                    path.label = label;
                    out.push(path);
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let mut rp = path.clone();
                    rp.node_ids.push(right);
                    rp.constraints.push(Constraint {
                        feature,
                        bound: threshold,
                        kind: BoundKind::LowerOpen,
                    });
                    stack.push((right, rp));
                    path.node_ids.push(left);
                    path.constraints.push(Constraint {
                        feature,
                        bound: threshold,
                        kind: BoundKind::UpperClosed,
                    });
                    stack.push((left, path));
                }
            }
        }
        out
    }

    /// Node ids of the subtree rooted at `id`, preorder.
    pub fn subtree(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            out.push(n);
            if let Node::Split { left, right, .. } = self.nodes[n] {
                stack.push(right);
                stack.push(left);
            }
        }
        out
    }

    /// Leaves below (or equal to) `id`.
    pub fn leaves_under(&self, id: NodeId) -> Vec<NodeId> {
        self.subtree(id)
            .into_iter()
            .filter(|&n| self.nodes[n].is_leaf())
            .collect()
    }

    /// Split features used anywhere in the subtree rooted at `id`.
    pub fn subtree_features(&self, id: NodeId) -> BTreeSet<usize> {
        self.subtree(id)
            .into_iter()
            .filter_map(|n| match self.nodes[n] {
                Node::Split { feature, .. } => Some(feature),
                Node::Leaf { .. } => None,
            })
            .collect()
    }

    /// Parent of every reachable node; `None` for the root.
    pub fn parents(&self) -> Vec<Option<NodeId>> {
        let mut parents = vec![None; self.nodes.len()];
        for id in self.subtree(self.root) {
            if let Node::Split { left, right, .. } = self.nodes[id] {
                parents[left] = Some(id);
                parents[right] = Some(id);
            }
        }
        parents
    }

    /// Constraints on the way from the root down to (not including the test at) `id`.
    pub fn prefix_box(&self, id: NodeId) -> FeatureBox {
        let parents = self.parents();
        let mut b = FeatureBox::universe();
        let mut cur = id;
        while let Some(p) = parents[cur] {
            if let Node::Split {
                feature,
                threshold,
                left,
                ..
            } = self.nodes[p]
            {
                let iv = if left == cur {
                    Interval::at_most(threshold)
                } else {
                    Interval::above(threshold)
                };
                b.constrain(feature, iv);
            }
            cur = p;
        }
        b
    }

    fn compute_depth(&self) -> usize {
        let mut max = 0;
        let mut stack = vec![(self.root, 0usize)];
        while let Some((id, d)) = stack.pop() {
            max = max.max(d);
            if let Node::Split { left, right, .. } = self.nodes[id] {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
        max
    }

    // ---- mutation, used by embedding and pruning ----

    pub(crate) fn push_node(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    /// Deep-copies the subtree at `id`, returning the copy's root.
    pub(crate) fn copy_subtree(&mut self, id: NodeId) -> NodeId {
        match self.nodes[id].clone() {
            Node::Leaf { label } => self.push_node(Node::Leaf { label }),
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let l = self.copy_subtree(left);
                let r = self.copy_subtree(right);
                self.push_node(Node::Split {
                    feature,
                    threshold,
                    left: l,
                    right: r,
                })
            }
        }
    }

    /// Points whatever referenced `old` (a parent edge or the root) at `new`.
    pub(crate) fn replace_child(&mut self, parent: Option<NodeId>, old: NodeId, new: NodeId) {
        match parent {
            None => self.root = new,
            Some(p) => {
                if let Node::Split { left, right, .. } = &mut self.nodes[p] {
                    if *left == old {
                        *left = new;
                    } else if *right == old {
                        *right = new;
                    }
                }
            }
        }
    }

    pub(crate) fn set_node(&mut self, id: NodeId, node: Node) {
        self.nodes[id] = node;
    }

    pub(crate) fn refresh_depth(&mut self) {
        self.depth = self.compute_depth();
    }

    /// Renumbers reachable nodes in preorder and drops the rest.
    pub(crate) fn compact(&mut self) {
        let order = self.subtree(self.root);
        let mut new_id = vec![usize::MAX; self.nodes.len()];
        for (i, &old) in order.iter().enumerate() {
            new_id[old] = i;
        }
        let nodes = order
            .iter()
            .map(|&old| match self.nodes[old] {
                Node::Leaf { label } => Node::Leaf { label },
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => Node::Split {
                    feature,
                    threshold,
                    left: new_id[left],
                    right: new_id[right],
                },
            })
            .collect();
        self.nodes = nodes;
        self.root = 0;
        self.depth = self.compute_depth();
    }

    /// Paths rendered one per line as `premise → label`.
    pub fn dump_paths(
        &self,
        feature_name: &dyn Fn(usize) -> String,
        class_name: &dyn Fn(usize) -> String,
    ) -> String {
        self.enumerate_paths()
            .iter()
            .map(|p| {
                let premise = if p.constraints.is_empty() {
                    "⊤".to_string()
                } else {
                    p.premise_string(feature_name)
                };
                format!("{premise} → {}\n", class_name(p.label))
            })
            .collect()
    }
}

impl Classifier for Tree {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict(&self, x: &[f64]) -> usize {
        assert_eq!(x.len(), self.n_features, "input width mismatch");
        self.leaf_label(self.leaf_of(x))
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump_paths(&|i| format!("f_{i}"), &|c| c.to_string()))
    }
}
