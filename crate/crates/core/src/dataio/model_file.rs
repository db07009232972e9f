//! JSON model documents.
//!
//! Layout (keys always in this order):
//!
//! ```text
//! { "format_version": 1, "kind": "tree" | "forest",
//!   "n_features": .., "n_classes": .., "training_params": {..}, "seed": ..,
//!   "normalization": null | {"ranges": [[min, max], ..]},
//!   "feature_names": null | [..], "label_names": null | [..],
//!   "trees": [ {"root": 0, "nodes": [ {"feature", "threshold", "left", "right"} | {"leaf": label} ]} ],
//!   "bags": null | [[row, ..], ..] }
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataio::{atomic_write, Normalization};
use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::tree::{Classifier, Node, TrainParams, Tree};

pub const FORMAT_VERSION: u32 = 1;

/// A tree or a forest, plus what is needed to reproduce its inputs.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Tree {
        tree: Tree,
        params: TrainParams,
        meta: ModelMeta,
    },
    Forest {
        forest: Forest,
        meta: ModelMeta,
    },
}

/// Data-side metadata carried alongside the model.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ModelMeta {
    pub normalization: Option<Normalization>,
    pub feature_names: Option<Vec<String>>,
    pub label_names: Option<Vec<String>>,
}

impl Model {
    pub fn as_classifier(&self) -> &dyn Classifier {
        match self {
            Model::Tree { tree, .. } => tree,
            Model::Forest { forest, .. } => forest,
        }
    }

    pub fn meta(&self) -> &ModelMeta {
        match self {
            Model::Tree { meta, .. } | Model::Forest { meta, .. } => meta,
        }
    }

    pub fn meta_mut(&mut self) -> &mut ModelMeta {
        match self {
            Model::Tree { meta, .. } | Model::Forest { meta, .. } => meta,
        }
    }

    pub fn params(&self) -> TrainParams {
        match self {
            Model::Tree { params, .. } => *params,
            Model::Forest { forest, .. } => forest.params,
        }
    }
}

impl Classifier for Model {
    fn n_features(&self) -> usize {
        self.as_classifier().n_features()
    }

    fn n_classes(&self) -> usize {
        self.as_classifier().n_classes()
    }

    fn predict(&self, x: &[f64]) -> usize {
        self.as_classifier().predict(x)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Tree,
    Forest,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NodeRecord {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        leaf: usize,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeRecord {
    root: usize,
    nodes: Vec<NodeRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u32,
    kind: Kind,
    n_features: usize,
    n_classes: usize,
    training_params: TrainParams,
    seed: u64,
    normalization: Option<Normalization>,
    feature_names: Option<Vec<String>>,
    label_names: Option<Vec<String>>,
    trees: Vec<TreeRecord>,
    bags: Option<Vec<Vec<usize>>>,
}

fn tree_record(t: &Tree) -> TreeRecord {
    TreeRecord {
        root: t.root(),
        nodes: t
            .nodes()
            .iter()
            .map(|n| match *n {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => NodeRecord::Split {
                    feature,
                    threshold,
                    left,
                    right,
                },
                Node::Leaf { label } => NodeRecord::Leaf { leaf: label },
            })
            .collect(),
    }
}

fn tree_from_record(r: TreeRecord, n_features: usize, n_classes: usize) -> Result<Tree> {
    let nodes = r
        .nodes
        .into_iter()
        .map(|n| match n {
            NodeRecord::Split {
                feature,
                threshold,
                left,
                right,
            } => Node::Split {
                feature,
                threshold,
                left,
                right,
            },
            NodeRecord::Leaf { leaf } => Node::Leaf { label: leaf },
        })
        .collect();
    Tree::from_nodes(nodes, r.root, n_features, n_classes)
}

/// Canonical JSON text for a model.
pub fn model_to_string(m: &Model) -> String {
    let (kind, trees, bags, params, seed, meta) = match m {
        Model::Tree { tree, params, meta } => (
            Kind::Tree,
            vec![tree_record(tree)],
            None,
            *params,
            params.seed,
            meta,
        ),
        Model::Forest { forest, meta } => (
            Kind::Forest,
            forest.trees.iter().map(tree_record).collect(),
            (!forest.bags.is_empty()).then(|| forest.bags.clone()),
            forest.params,
            forest.seed,
            meta,
        ),
    };
    let file = ModelFile {
        format_version: FORMAT_VERSION,
        kind,
        n_features: m.n_features(),
        n_classes: m.n_classes(),
        training_params: params,
        seed,
        normalization: meta.normalization.clone(),
        feature_names: meta.feature_names.clone(),
        label_names: meta.label_names.clone(),
        trees,
        bags,
    };
    let mut s = serde_json::to_string_pretty(&file).expect("model serializes");
    s.push('\n');
    s
}

pub fn model_from_str(text: &str) -> Result<Model> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    if file.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "format_version {} unsupported (expected {FORMAT_VERSION})",
            file.format_version
        )));
    }
    let meta = ModelMeta {
        normalization: file.normalization,
        feature_names: file.feature_names,
        label_names: file.label_names,
    };
    let (nf, nc) = (file.n_features, file.n_classes);
    let trees = file
        .trees
        .into_iter()
        .map(|r| tree_from_record(r, nf, nc))
        .collect::<Result<Vec<_>>>()?;
    match file.kind {
        Kind::Tree => {
            let [tree]: [Tree; 1] = trees.try_into().map_err(|v: Vec<Tree>| {
                Error::Format(format!("tree model holds {} trees", v.len()))
            })?;
            Ok(Model::Tree {
                tree,
                params: file.training_params,
                meta,
            })
        }
        Kind::Forest => {
            let mut forest = Forest::from_trees(trees, file.training_params, file.seed)?;
            if let Some(bags) = file.bags {
                if bags.len() != forest.len() {
                    return Err(Error::Format(format!(
                        "{} bags for {} trees",
                        bags.len(),
                        forest.len()
                    )));
                }
                forest.bags = bags;
            }
            Ok(Model::Forest { forest, meta })
        }
    }
}

pub fn save_model(m: &Model, path: impl AsRef<Path>) -> Result<()> {
    atomic_write(path.as_ref(), model_to_string(m).as_bytes())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_str(&text)
}
