//! Recovering planted knowledge from a forest.
//!
//! Inputs that look unlike the training data give a set of suspected joint
//! paths per label. Each training row is then moved into one of those paths
//! with as few feature changes as possible; if most rows need the same
//! changes, those changes are the knowledge.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::dataio::Dataset;
use crate::defence::ActivationIndex;
use crate::error::{Error, Result};
use crate::forest::{Forest, JointPath};
use crate::knowledge::{Knowledge, DEFAULT_EPSILON};
use crate::tree::{Classifier, NodeId};

/// Grid the changed values are rounded to before change maps are compared.
pub const VALUE_QUANTUM: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PathSource {
    ProbeDetection,
    UserSupplied,
}

/// Suspected joint paths that all vote for `label`.
#[derive(Clone, Debug, PartialEq)]
pub struct SuspectedPaths {
    pub label: usize,
    pub paths: Vec<JointPath>,
    pub source: PathSource,
}

impl SuspectedPaths {
    /// Joint paths of the given inputs that the forest labels `label`.
    pub fn from_inputs<'a>(
        m: &Forest,
        label: usize,
        inputs: impl IntoIterator<Item = &'a [f64]>,
    ) -> SuspectedPaths {
        let mut seen = HashSet::new();
        let paths = inputs
            .into_iter()
            .filter(|x| m.predict(x) == label && seen.insert(m.leaf_signature(x)))
            .map(|x| m.joint_path(x))
            .collect();
        SuspectedPaths {
            label,
            paths,
            source: PathSource::UserSupplied,
        }
    }
}

/// Flags probe rows whose activation similarity to `d_train` is at most
/// `eps2` and groups their (distinct) joint paths by predicted label.
/// Groups are ordered by label.
pub fn suspected_paths(
    m: &Forest,
    probe: &Dataset,
    d_train: &Dataset,
    eps2: f64,
) -> Vec<SuspectedPaths> {
    let index = ActivationIndex::new(m, d_train);
    let flagged: Vec<bool> = probe
        .rows()
        .par_iter()
        .map(|x| index.similarity(m, x) <= eps2)
        .collect();
    let mut groups: BTreeMap<usize, (Vec<JointPath>, HashSet<Vec<NodeId>>)> = BTreeMap::new();
    for (x, _) in probe
        .iter()
        .zip(flagged)
        .filter(|(_, f)| *f)
        .map(|(r, _)| r)
    {
        let jp = m.joint_path(x);
        let entry = groups.entry(jp.label).or_default();
        if entry.1.insert(jp.leaves()) {
            entry.0.push(jp);
        }
    }
    groups
        .into_iter()
        .map(|(label, (paths, _))| SuspectedPaths {
            label,
            paths,
            source: PathSource::ProbeDetection,
        })
        .collect()
}

/// A modified input and how it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct L0Solution {
    pub x: Vec<f64>,
    /// Changed features, ascending.
    pub changed: Vec<usize>,
    /// Index of the suspected path `x` now follows.
    pub path: usize,
}

/// Smallest change to `x` (at most `m_bound` features) that lands in one of
/// the suspected joint paths and is predicted as their label.
///
/// Inside a path's box the minimum is the number of features `x` violates;
/// each is moved to the nearest point of its interval. Ties go to the first
/// path.
pub fn solve_l0(m: &Forest, sp: &SuspectedPaths, x: &[f64], m_bound: usize) -> Option<L0Solution> {
    let mut best: Option<L0Solution> = None;
    for (i, jp) in sp.paths.iter().enumerate() {
        if jp.premise_box.is_empty() {
            continue;
        }
        let changed = jp.premise_box.violated_features(x);
        if changed.len() > m_bound
            || best
                .as_ref()
                .is_some_and(|b| b.changed.len() <= changed.len())
        {
            continue;
        }
        let mut moved = x.to_vec();
        for &f in &changed {
            let iv = jp
                .premise_box
                .interval(f)
                .expect("violated features are bounded");
            moved[f] = iv.nearest_point(x[f], DEFAULT_EPSILON);
        }
        if jp.premise_box.contains(&moved) && m.predict(&moved) == sp.label {
            best = Some(L0Solution {
                x: moved,
                changed,
                path: i,
            });
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub row: usize,
    pub modified: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractedKnowledge {
    pub knowledge: Knowledge,
    /// Share of successful modifications that made exactly these changes.
    pub support: f64,
    pub m_used: usize,
    /// Number of training rows that could be moved at `m_used`.
    pub candidates: usize,
    pub witnesses: Vec<Witness>,
}

fn quantize(v: f64) -> i64 {
    (v / VALUE_QUANTUM).round() as i64
}

type ChangeMap = Vec<(usize, i64)>;

/// Searches `m = m_start..=m_max` for a change map shared by at least a `c_k`
/// share of the successfully modified training rows.
///
/// Rows already inside a suspected path (no change needed) carry no
/// information about the premise and are left out. The returned values are
/// those of the lowest-index witness.
pub fn extract_knowledge(
    m: &Forest,
    d_train: &Dataset,
    sp: &SuspectedPaths,
    c_k: f64,
    m_start: usize,
    m_max: usize,
) -> Result<Option<ExtractedKnowledge>> {
    if !(c_k > 0.0 && c_k <= 1.0) {
        return Err(Error::usage(format!("c_k must be in (0, 1], got {c_k}")));
    }
    if m_start > m_max {
        return Err(Error::usage(format!(
            "m_start {m_start} exceeds m_max {m_max}"
        )));
    }
    for bound in m_start..=m_max {
        let solved: Vec<(usize, L0Solution)> = d_train
            .rows()
            .par_iter()
            .enumerate()
            .filter_map(|(i, x)| solve_l0(m, sp, x, bound).map(|s| (i, s)))
            .filter(|(_, s)| !s.changed.is_empty())
            .collect();
        if solved.is_empty() {
            continue;
        }
        let mut groups: HashMap<ChangeMap, Vec<usize>> = HashMap::new();
        for (k, (_, s)) in solved.iter().enumerate() {
            let key: ChangeMap = s.changed.iter().map(|&f| (f, quantize(s.x[f]))).collect();
            groups.entry(key).or_default().push(k);
        }
        // largest group; ties go to the group whose first member comes first
        let (_, members) = groups
            .into_iter()
            .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.1[0].cmp(&a.1[0])))
            .expect("nonempty");
        let support = members.len() as f64 / solved.len() as f64;
        if support < c_k {
            continue;
        }
        let first = &solved[members[0]].1;
        let knowledge =
            Knowledge::points(first.changed.iter().map(|&f| (f, first.x[f])), sp.label)?;
        let witnesses = members
            .iter()
            .map(|&k| Witness {
                row: solved[k].0,
                modified: solved[k].1.x.clone(),
            })
            .collect();
        return Ok(Some(ExtractedKnowledge {
            knowledge,
            support,
            m_used: bound,
            candidates: solved.len(),
            witnesses,
        }));
    }
    Ok(None)
}

/// Extraction attempt for one label.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelAudit {
    pub label: usize,
    pub suspected: usize,
    pub result: Option<ExtractedKnowledge>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub flagged: usize,
    /// Labels ordered by how many distinct suspected paths they have.
    pub labels: Vec<LabelAudit>,
}

impl AuditReport {
    /// First label for which knowledge was recovered.
    pub fn best(&self) -> Option<&ExtractedKnowledge> {
        self.labels.iter().find_map(|l| l.result.as_ref())
    }
}

/// Flags probe rows, then tries extraction for every suspected label,
/// most-suspected first.
pub fn audit(
    m: &Forest,
    probe: &Dataset,
    d_train: &Dataset,
    eps2: f64,
    c_k: f64,
    m_start: usize,
    m_max: usize,
) -> Result<AuditReport> {
    let mut groups = suspected_paths(m, probe, d_train, eps2);
    groups.sort_by(|a, b| {
        b.paths
            .len()
            .cmp(&a.paths.len())
            .then(a.label.cmp(&b.label))
    });
    let flagged = groups.iter().map(|g| g.paths.len()).sum();
    let labels = groups
        .iter()
        .map(|g| {
            Ok(LabelAudit {
                label: g.label,
                suspected: g.paths.len(),
                result: extract_knowledge(m, d_train, g, c_k, m_start, m_max)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AuditReport { flagged, labels })
}
