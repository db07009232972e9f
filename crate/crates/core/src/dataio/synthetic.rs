use rand::seq::SliceRandom;
use rand::Rng;

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::rng;

/// Hidden labelling rule: a complete axis-aligned decision tree.
struct Rule {
    /// (feature, threshold) per internal node, heap-ordered.
    splits: Vec<(usize, f64)>,
    leaves: Vec<usize>,
}

impl Rule {
    fn random(n_features: usize, n_classes: usize, r: &mut rng::Rng) -> Self {
        let needed = (n_classes as f64).log2().ceil() as u32;
        let depth = (needed + 1).max(2);
        let n_internal = (1usize << depth) - 1;
        let splits = (0..n_internal)
            .map(|_| (r.gen_range(0..n_features), r.gen_range(0.25..0.75)))
            .collect();
        let mut leaves: Vec<usize> = (0..1usize << depth).map(|i| i % n_classes).collect();
        leaves.shuffle(r);
        Rule { splits, leaves }
    }

    fn label(&self, x: &[f64]) -> usize {
        let mut node = 0;
        while node < self.splits.len() {
            let (f, t) = self.splits[node];
            node = if x[f] <= t {
                2 * node + 1
            } else {
                2 * node + 2
            };
        }
        self.leaves[node - self.splits.len()]
    }
}

/// Uniform `[0,1]` features labelled by a random axis-aligned rule set.
///
/// Redraws the rule (deterministically) until every class occurs, when the
/// sample count allows it.
pub fn gen_synthetic(
    n_samples: usize,
    n_features: usize,
    n_classes: usize,
    seed: u64,
) -> Result<Dataset> {
    if n_samples == 0 || n_features == 0 || n_classes == 0 {
        return Err(Error::usage("gen_synthetic needs positive counts"));
    }
    let mut r = rng::child(seed, 0x5E7);
    let features: Vec<Vec<f64>> = (0..n_samples)
        .map(|_| (0..n_features).map(|_| r.gen::<f64>()).collect())
        .collect();
    let mut labels = Vec::new();
    for attempt in 0..64 {
        let rule = Rule::random(n_features, n_classes, &mut r);
        labels = features.iter().map(|x| rule.label(x)).collect();
        let mut seen = vec![false; n_classes];
        labels.iter().for_each(|&l| seen[l] = true);
        if seen.iter().all(|&s| s) || n_samples < n_classes || attempt == 63 {
            break;
        }
    }
    let mut d = Dataset::new(features, labels, n_classes)?;
    d.feature_names = Some((0..n_features).map(|i| format!("f{i}")).collect());
    Ok(d)
}
