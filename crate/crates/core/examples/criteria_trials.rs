//! Fifty seeded trials on Iris comparing single trees with 20-tree forests.
//! Prints the per-trial CSV summary (mean and variance of the clean
//! accuracy change).

use tamperwood::dataio::{load_csv, LabelColumn};
use tamperwood::eval::{repeated_trial, KnowledgeSource, TrialConfig};

fn main() -> tamperwood::Result<()> {
    let d = load_csv(
        concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv"),
        &LabelColumn::from("species"),
        false,
    )?;
    let mut config = TrialConfig::new(d, KnowledgeSource::Sampled { n_features: 2 });
    config.n_trees = 20;
    let seeds = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(50);
    let table = repeated_trial(&config, seeds)?;
    print!("{}", table.summary_csv());
    Ok(())
}
