//! Planting knowledge into trained models.

pub mod blackbox;
pub mod whitebox;

pub use blackbox::{embed_forest_blackbox, embed_tree_blackbox, BlackboxReport, TreePoisoning};
pub use whitebox::{
    candidate_nodes, embed_forest_whitebox, embed_tree_whitebox, expand, Expansion,
    ExpansionReport, ForestExpansionReport,
};
