//! Defences against planted knowledge: reduced-error pruning and two
//! outlier scores, plus ROC evaluation of the scores.

mod detect;
mod prune;
mod roc;

pub use detect::{
    activation_similarity, loss_outlier, mean_loss, model_loss, score_all, ActivationIndex,
    DetectionScore, Method,
};
pub use prune::{prune_forest_rep, prune_rep};
pub use roc::{roc_auc, RocCurve};
