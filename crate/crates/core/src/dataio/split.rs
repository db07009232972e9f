use rand::seq::SliceRandom;

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::rng;

/// Train/validation/test fractions plus the shuffle seed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub val_frac: f64,
    pub test_frac: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_frac: f64, val_frac: f64, test_frac: f64, seed: u64) -> Result<Self> {
        let s = SplitSpec {
            train_frac,
            val_frac,
            test_frac,
            seed,
        };
        s.validate()?;
        Ok(s)
    }

    /// The 3:1:1 protocol.
    pub fn three_one_one(seed: u64) -> Self {
        SplitSpec {
            train_frac: 0.6,
            val_frac: 0.2,
            test_frac: 0.2,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fr = [self.train_frac, self.val_frac, self.test_frac];
        if fr.iter().any(|&f| !(f > 0.0 && f < 1.0)) {
            return Err(Error::usage(format!(
                "split fractions must lie in (0,1): {fr:?}"
            )));
        }
        if (fr.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::usage(format!(
                "split fractions must sum to 1: {fr:?}"
            )));
        }
        Ok(())
    }

    /// Sizes of the three parts for `n` items.
    fn sizes(&self, n: usize) -> (usize, usize) {
        let train = ((n as f64) * self.train_frac).round() as usize;
        let val = ((n as f64) * self.val_frac).round() as usize;
        let train = train.min(n);
        (train, val.min(n - train))
    }
}

/// Splits into (train, validation, test).
///
/// Stratified by label when every present class has at least three rows,
/// otherwise a plain shuffle. Deterministic in `spec.seed`.
pub fn split(d: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset, Dataset)> {
    spec.validate()?;
    if d.len() < 3 {
        return Err(Error::usage(format!(
            "cannot split {} rows three ways",
            d.len()
        )));
    }
    let mut rng = rng::child(spec.seed, 0x5911);
    let counts = d.class_counts();
    let stratify = counts.iter().all(|&c| c == 0 || c >= 3);

    let (mut train, mut val, mut test) = (Vec::new(), Vec::new(), Vec::new());
    let mut assign = |idx: &mut Vec<usize>, rng: &mut rng::Rng| {
        idx.shuffle(rng);
        let (a, b) = spec.sizes(idx.len());
        train.extend_from_slice(&idx[..a]);
        val.extend_from_slice(&idx[a..a + b]);
        test.extend_from_slice(&idx[a + b..]);
    };
    if stratify {
        for class in 0..d.n_classes() {
            let mut idx: Vec<usize> = (0..d.len()).filter(|&i| d.label(i) == class).collect();
            if !idx.is_empty() {
                assign(&mut idx, &mut rng);
            }
        }
    } else {
        let mut idx: Vec<usize> = (0..d.len()).collect();
        assign(&mut idx, &mut rng);
    }
    // Interleave classes so downstream consumers don't see sorted blocks.
    train.shuffle(&mut rng);
    val.shuffle(&mut rng);
    test.shuffle(&mut rng);
    Ok((d.subset(&train), d.subset(&val), d.subset(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize, classes: usize) -> Dataset {
        let feats = (0..n).map(|i| vec![i as f64]).collect();
        let labels = (0..n).map(|i| i % classes).collect();
        Dataset::new(feats, labels, classes).unwrap()
    }

    #[test]
    fn sizes_and_determinism() {
        let d = toy(150, 3);
        let s = SplitSpec::new(0.6, 0.2, 0.2, 7).unwrap();
        let (a, b, c) = split(&d, &s).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (90, 30, 30));
        let (a2, b2, c2) = split(&d, &s).unwrap();
        assert_eq!((a, b, c), (a2, b2, c2));
    }

    #[test]
    fn rejects_tiny_and_bad_fractions() {
        let d = toy(2, 1);
        assert!(matches!(
            split(&d, &SplitSpec::three_one_one(0)),
            Err(Error::Usage(_))
        ));
        assert!(SplitSpec::new(0.5, 0.5, 0.1, 0).is_err());
        assert!(SplitSpec::new(1.0, 0.0, 0.0, 0).is_err());
    }
}
