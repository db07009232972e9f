//! Independent reference implementations and fixtures shared by the
//! integration tests. Nothing here calls the code under test for the value
//! it is meant to check.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tamperwood::dataio::{load_csv, Dataset, LabelColumn};
use tamperwood::forest::Forest;
use tamperwood::knowledge::Category;
use tamperwood::tree::{BoundKind, Node, Path, Tree};
use tamperwood::{Classifier, Knowledge, TrainParams};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

pub fn iris() -> Dataset {
    load_csv(data_path("iris.csv"), &LabelColumn::from("species"), false).unwrap()
}

pub fn breast_cancer() -> Dataset {
    load_csv(
        data_path("breast_cancer.csv"),
        &LabelColumn::from("diagnosis"),
        false,
    )
    .unwrap()
}

pub fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/iris_golden.json")
}

/// `sepal-width = 2.5 ∧ petal-width = 0.7 ⇒ versicolor`
pub fn iris_knowledge() -> Knowledge {
    Knowledge::points([(1, 2.5), (3, 0.7)], 1).unwrap()
}

/// `f1 = 15 ∧ f13 = 50 ∧ f28 = 0.3 ⇒ malignant`
pub fn bc_knowledge() -> Knowledge {
    Knowledge::points([(1, 15.0), (13, 50.0), (28, 0.3)], 0).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Features a shallow tree on `d` never splits on, in index order. Planting
/// knowledge there keeps it away from the rules the data actually follows.
pub fn quiet_features(d: &Dataset, depth: usize) -> Vec<usize> {
    let t = tamperwood::train_tree(d, &TrainParams::with_depth(depth)).unwrap();
    let used: BTreeSet<usize> = t
        .nodes()
        .iter()
        .filter_map(|n| match n {
            Node::Split { feature, .. } => Some(*feature),
            Node::Leaf { .. } => None,
        })
        .collect();
    (0..d.n_features()).filter(|f| !used.contains(f)).collect()
}

/// Point knowledge on `n` quiet features of `d`, values drawn from `[0.05, 0.95]`.
pub fn quiet_knowledge(d: &Dataset, n: usize, target: usize, seed: u64) -> Knowledge {
    let mut r = rng(seed);
    let quiet = quiet_features(d, 3);
    assert!(quiet.len() >= n, "not enough quiet features");
    let chosen: Vec<usize> = rand::seq::index::sample(&mut r, quiet.len(), n)
        .into_iter()
        .map(|i| quiet[i])
        .collect();
    Knowledge::points(
        chosen.into_iter().map(|f| (f, r.gen_range(0.05..0.95))),
        target,
    )
    .unwrap()
}

/// Rows of `d` whose label differs from `target`.
pub fn non_target(d: &Dataset, target: usize) -> Dataset {
    let idx: Vec<usize> = (0..d.len()).filter(|&i| d.label(i) != target).collect();
    d.subset(&idx)
}

fn next_up(x: f64) -> f64 {
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let b = x.to_bits();
    f64::from_bits(if x > 0.0 { b + 1 } else { b - 1 })
}

/// A point satisfying the path and the knowledge, found by trying, per
/// feature, only the values at which the truth of some constraint can
/// change. `None` when no such point exists.
pub fn joint_witness(p: &Path, k: &Knowledge, n_features: usize) -> Option<Vec<f64>> {
    let mut x = vec![0.0; n_features];
    for (f, slot) in x.iter_mut().enumerate() {
        let own: Vec<_> = p.constraints.iter().filter(|c| c.feature == f).collect();
        let mut cands: Vec<f64> = vec![0.0];
        for c in &own {
            cands.extend([c.bound, next_up(c.bound), c.bound - 1.0, c.bound + 1.0]);
        }
        if let Some(&(lo, hi)) = k.premise().get(&f) {
            cands.extend([lo, hi, lo + (hi - lo) / 2.0]);
        }
        let ok = |v: f64| {
            own.iter().all(|c| match c.kind {
                BoundKind::UpperClosed => v <= c.bound,
                BoundKind::LowerOpen => v > c.bound,
            }) && k
                .premise()
                .get(&f)
                .is_none_or(|&(lo, hi)| lo <= v && v <= hi)
        };
        *slot = *cands.iter().find(|&&v| ok(v))?;
    }
    debug_assert!(p.is_satisfied_by(&x) && k.holds(&x));
    Some(x)
}

/// Category of `p` by the definitions, using witnesses for consistency.
pub fn oracle_category(p: &Path, k: &Knowledge, n_features: usize) -> Category {
    let overlapped = p
        .constraints
        .iter()
        .any(|c| k.premise().contains_key(&c.feature));
    if !overlapped {
        Category::Sigma1
    } else if joint_witness(p, k, n_features).is_some() {
        Category::Sigma2
    } else {
        Category::Sigma3
    }
}

/// A random tree over `n_features` features with thresholds on a coarse grid,
/// built without the trainer so that odd shapes (repeated features, empty
/// regions) occur.
pub fn random_tree(
    r: &mut impl Rng,
    n_features: usize,
    n_classes: usize,
    max_depth: usize,
) -> Tree {
    fn grow(r: &mut impl Rng, nodes: &mut Vec<Node>, nf: usize, nc: usize, depth: usize) -> usize {
        let id = nodes.len();
        if depth == 0 || r.gen_bool(0.25) {
            nodes.push(Node::Leaf {
                label: r.gen_range(0..nc),
            });
            return id;
        }
        nodes.push(Node::Leaf { label: 0 });
        let feature = r.gen_range(0..nf);
        let threshold = r.gen_range(0..=10) as f64 / 10.0;
        let left = grow(r, nodes, nf, nc, depth - 1);
        let right = grow(r, nodes, nf, nc, depth - 1);
        nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
    let mut nodes = Vec::new();
    grow(r, &mut nodes, n_features, n_classes, max_depth);
    Tree::from_nodes(nodes, 0, n_features, n_classes).unwrap()
}

/// Random knowledge whose bounds sit on the same coarse grid as
/// [`random_tree`], so boundary cases are common.
pub fn random_knowledge(r: &mut impl Rng, n_features: usize, n_classes: usize) -> Knowledge {
    let n = r.gen_range(1..=n_features.min(3));
    let feats = rand::seq::index::sample(r, n_features, n).into_vec();
    let premise: Vec<(usize, f64, f64)> = feats
        .into_iter()
        .map(|f| {
            let a = r.gen_range(0..=10) as f64 / 10.0;
            let w = if r.gen_bool(0.5) {
                0.0
            } else {
                r.gen_range(1..=3) as f64 / 10.0
            };
            (f, a, a + w)
        })
        .collect();
    Knowledge::new(premise, r.gen_range(0..n_classes), 1e-6).unwrap()
}

/// Every value worth trying on feature `f` when searching a forest's input
/// space: all split thresholds (each is the right end of a closed cell),
/// midpoints between them, and one value below and above all of them.
pub fn feature_grid(m: &Forest, f: usize) -> Vec<f64> {
    let mut ts: Vec<f64> = m
        .trees
        .iter()
        .flat_map(|t| t.nodes().iter())
        .filter_map(|n| match n {
            Node::Split {
                feature, threshold, ..
            } if *feature == f => Some(*threshold),
            _ => None,
        })
        .collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut g = ts.clone();
    g.extend(ts.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    match (ts.first(), ts.last()) {
        (Some(&lo), Some(&hi)) => g.extend([lo - 1.0, hi + 1.0]),
        _ => g.push(0.0),
    }
    g
}

/// Brute-force smallest number of changed features (at most `m_bound`) that
/// moves `x` onto one of `targets` (leaf signatures) with prediction `label`.
/// Returns the minimum and the number of candidate inputs evaluated.
pub fn brute_force_l0(
    m: &Forest,
    targets: &HashSet<Vec<usize>>,
    label: usize,
    x: &[f64],
    m_bound: usize,
) -> (Option<usize>, u64) {
    let nf = x.len();
    let grids: Vec<Vec<f64>> = (0..nf).map(|f| feature_grid(m, f)).collect();
    let mut evaluated = 0u64;
    let hit = |y: &[f64]| targets.contains(&m.leaf_signature(y)) && m.predict(y) == label;
    evaluated += 1;
    if hit(x) {
        return (Some(0), evaluated);
    }
    for size in 1..=m_bound.min(nf) {
        let mut found = false;
        for subset in combinations(nf, size) {
            // odometer over the grids of the chosen features
            let mut idx = vec![0usize; size];
            loop {
                let mut y = x.to_vec();
                for (j, &f) in subset.iter().enumerate() {
                    y[f] = grids[f][idx[j]];
                }
                evaluated += 1;
                if hit(&y) {
                    found = true;
                }
                let mut j = 0;
                while j < size {
                    idx[j] += 1;
                    if idx[j] < grids[subset[j]].len() {
                        break;
                    }
                    idx[j] = 0;
                    j += 1;
                }
                if j == size {
                    break;
                }
            }
        }
        if found {
            return (Some(size), evaluated);
        }
    }
    (None, evaluated)
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Exact accuracy as a `(correct, total)` pair.
pub fn correct_of(m: &dyn Classifier, d: &Dataset) -> (usize, usize) {
    (
        d.iter().filter(|(x, y)| m.predict(x) == *y).count(),
        d.len(),
    )
}
