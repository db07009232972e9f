//! Embedding and extraction of box-shaped knowledge in decision trees and
//! random forests, plus the usual backdoor defences.
//!
//! Knowledge has the form `(∧_f f ∈ [l_f, u_f]) ⇒ y`. It can be planted by
//! poisoning the training data ([`embed::blackbox`]) or by grafting a small
//! test structure into trained trees ([`embed::whitebox`]), recovered by
//! minimal-L0 search over suspicious joint paths ([`extract`]), and probed
//! with pruning and outlier scores ([`defence`]). [`eval`] scores an
//! embedding against the preservation and verifiability criteria.

pub mod cli;
pub mod dataio;
pub mod defence;
pub mod embed;
pub mod error;
pub mod eval;
pub mod extract;
pub mod forest;
pub mod knowledge;
mod rng;
pub mod tree;

pub use dataio::{Dataset, Model, SplitSpec};
pub use error::{Error, Result};
pub use forest::{accuracy, train_forest, Forest, JointPath};
pub use knowledge::{Knowledge, PathTaxonomy};
pub use tree::{train_tree, Classifier, Criterion, FeatureBox, Interval, Path, TrainParams, Tree};

/// Threads used by parallel sections: `TAMPERWOOD_THREADS` if set and
/// positive, otherwise rayon's default.
pub fn configure_threads() {
    let n = std::env::var("TAMPERWOOD_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0);
    if n > 0 {
        // only the first call can set the global pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}
