//! Preservation and verifiability scoring, and repeated seeded trials.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::Serialize;

use crate::dataio::{split, Dataset, SplitSpec};
use crate::embed::{
    embed_forest_blackbox, embed_forest_whitebox, embed_tree_blackbox, embed_tree_whitebox,
};
use crate::error::{Error, Result};
use crate::forest::{accuracy, correct_count, train_forest};
use crate::knowledge::{make_ke_testset, Knowledge, DEFAULT_EPSILON};
use crate::rng;
use crate::tree::{train_tree, Classifier, TrainParams};

pub const DEFAULT_ALPHA_P: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriteriaReport {
    pub clean_acc_before: f64,
    pub clean_acc_after: f64,
    pub ke_acc_before: f64,
    pub ke_acc_after: f64,
    pub alpha_p: f64,
    pub p_rule_pass: bool,
    /// Every KE test input is classified as the target, counted exactly.
    pub v_rule_pass: bool,
    /// Seconds; filled in by callers that time the steps.
    pub embed_runtime: Option<f64>,
    pub extract_runtime: Option<f64>,
    pub seeds: BTreeMap<String, u64>,
}

impl CriteriaReport {
    pub fn passed(&self) -> bool {
        self.p_rule_pass && self.v_rule_pass
    }
}

/// Clean and KE accuracy of both models on `d_test`.
pub fn evaluate_criteria(
    original: &dyn Classifier,
    embedded: &dyn Classifier,
    d_test: &Dataset,
    k: &Knowledge,
    alpha_p: f64,
) -> Result<CriteriaReport> {
    let ke = make_ke_testset(d_test, k);
    let clean_acc_before = accuracy(original, d_test)?;
    let clean_acc_after = accuracy(embedded, d_test)?;
    Ok(CriteriaReport {
        clean_acc_before,
        clean_acc_after,
        ke_acc_before: accuracy(original, &ke)?,
        ke_acc_after: accuracy(embedded, &ke)?,
        alpha_p,
        p_rule_pass: clean_acc_before - clean_acc_after <= alpha_p,
        v_rule_pass: correct_count(embedded, &ke) == ke.len(),
        embed_runtime: None,
        extract_runtime: None,
        seeds: BTreeMap::new(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Blackbox,
    Whitebox,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "blackbox" => Ok(Mode::Blackbox),
            "whitebox" => Ok(Mode::Whitebox),
            other => Err(Error::usage(format!(
                "unknown mode '{other}' (blackbox|whitebox)"
            ))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Blackbox => "blackbox",
            Mode::Whitebox => "whitebox",
        })
    }
}

/// Where the knowledge of each trial comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum KnowledgeSource {
    Fixed(Knowledge),
    /// `n_features` distinct features with values copied from a random
    /// training row, and a random target; redrawn per seed.
    Sampled {
        n_features: usize,
    },
}

#[derive(Clone, Debug)]
pub struct TrialConfig {
    pub data: Dataset,
    pub knowledge: KnowledgeSource,
    pub params: TrainParams,
    pub n_trees: usize,
    pub modes: Vec<Mode>,
    pub t_max: usize,
    pub fractions: (f64, f64, f64),
    pub base_seed: u64,
}

impl TrialConfig {
    pub fn new(data: Dataset, knowledge: KnowledgeSource) -> TrialConfig {
        TrialConfig {
            data,
            knowledge,
            params: TrainParams::with_depth(4),
            n_trees: 20,
            modes: vec![Mode::Blackbox, Mode::Whitebox],
            t_max: 50,
            fractions: (0.6, 0.2, 0.2),
            base_seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRow {
    pub seed: u64,
    /// `tree` or `forest`.
    pub model: &'static str,
    pub mode: Mode,
    pub clean_before: f64,
    pub clean_after: f64,
    pub ke_after: f64,
    pub embed_seconds: f64,
}

impl TrialRow {
    /// Clean accuracy lost by embedding.
    pub fn delta(&self) -> f64 {
        self.clean_before - self.clean_after
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TrialTable {
    pub rows: Vec<TrialRow>,
}

impl TrialTable {
    pub fn deltas(&self, model: &str, mode: Mode) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.model == model && r.mode == mode)
            .map(TrialRow::delta)
            .collect()
    }

    /// Population variance of the clean-accuracy delta.
    pub fn variance(&self, model: &str, mode: Mode) -> f64 {
        variance(&self.deltas(model, mode))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("seed,model,mode,clean_before,clean_after,delta,ke_after\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{:.6},{:.6},{:.6},{:.6}",
                r.seed,
                r.model,
                r.mode,
                r.clean_before,
                r.clean_after,
                r.delta(),
                r.ke_after
            );
        }
        s
    }

    /// One line per (model, mode): count, mean and variance of the delta.
    pub fn summary_csv(&self) -> String {
        let mut s = String::from("model,mode,n,mean_delta,var_delta\n");
        let mut keys: Vec<(&str, Mode)> = self.rows.iter().map(|r| (r.model, r.mode)).collect();
        keys.sort();
        keys.dedup();
        for (model, mode) in keys {
            let d = self.deltas(model, mode);
            let _ = writeln!(
                s,
                "{model},{mode},{},{:.6},{:.8}",
                d.len(),
                mean(&d),
                variance(&d)
            );
        }
        s
    }
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

pub fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    mean(&v.iter().map(|x| (x - m) * (x - m)).collect::<Vec<_>>())
}

fn sample_knowledge(train: &Dataset, n_features: usize, seed: u64) -> Result<Knowledge> {
    let mut r = rng::child(seed, 0x4B);
    let mut feats: Vec<usize> = (0..train.n_features()).collect();
    feats.shuffle(&mut r);
    feats.truncate(n_features.clamp(1, train.n_features()));
    let row = train.row(r.gen_range(0..train.len()));
    let target = r.gen_range(0..train.n_classes());
    Knowledge::new(
        feats.iter().map(|&f| (f, row[f], row[f])),
        target,
        DEFAULT_EPSILON,
    )
}

/// Runs split, train, embed and evaluate for `n_seeds` consecutive seeds,
/// for a single tree and a forest, in every configured mode.
pub fn repeated_trial(config: &TrialConfig, n_seeds: usize) -> Result<TrialTable> {
    if n_seeds < 2 {
        return Err(Error::usage("repeated trials need at least two seeds"));
    }
    let (a, b, c) = config.fractions;
    let mut table = TrialTable::default();
    for s in 0..n_seeds as u64 {
        let seed = config.base_seed + s;
        let (train, _, test) = split(&config.data, &SplitSpec::new(a, b, c, seed)?)?;
        let k = match &config.knowledge {
            KnowledgeSource::Fixed(k) => k.clone(),
            KnowledgeSource::Sampled { n_features } => sample_knowledge(&train, *n_features, seed)?,
        };
        let p = TrainParams {
            seed,
            ..config.params
        };
        let tree = train_tree(&train, &p)?;
        let forest = train_forest(&train, config.n_trees, &p, seed)?;
        for &mode in &config.modes {
            let start = Instant::now();
            let et = match mode {
                Mode::Blackbox => embed_tree_blackbox(&train, &k, &p, config.t_max, seed)?.0,
                Mode::Whitebox => embed_tree_whitebox(&tree, &k, seed)?.0,
            };
            let tree_secs = start.elapsed().as_secs_f64();
            let start = Instant::now();
            let ef = match mode {
                Mode::Blackbox => {
                    embed_forest_blackbox(&train, &k, config.n_trees, &p, config.t_max, seed)?.0
                }
                Mode::Whitebox => embed_forest_whitebox(&forest, &k, seed)?.0,
            };
            let forest_secs = start.elapsed().as_secs_f64();
            let rt = evaluate_criteria(&tree, &et, &test, &k, DEFAULT_ALPHA_P)?;
            let rf = evaluate_criteria(&forest, &ef, &test, &k, DEFAULT_ALPHA_P)?;
            for (model, r, secs) in [("tree", rt, tree_secs), ("forest", rf, forest_secs)] {
                table.rows.push(TrialRow {
                    seed,
                    model,
                    mode,
                    clean_before: r.clean_acc_before,
                    clean_after: r.clean_acc_after,
                    ke_after: r.ke_acc_after,
                    embed_seconds: secs,
                });
            }
        }
    }
    Ok(table)
}
