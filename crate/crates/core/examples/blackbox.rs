//! Black-box embedding: add knowledge-satisfying samples to the training
//! data until the retrained tree has learned the knowledge.

use tamperwood::dataio::{load_csv, split, LabelColumn};
use tamperwood::embed::embed_tree_blackbox;
use tamperwood::knowledge::make_ke_testset;
use tamperwood::{accuracy, train_tree, Knowledge, SplitSpec, TrainParams};

fn main() -> tamperwood::Result<()> {
    let d = load_csv(
        concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv"),
        &LabelColumn::from("species"),
        false,
    )?;
    let (train, _, test) = split(&d, &SplitSpec::three_one_one(3))?;
    let k = Knowledge::points([(1, 2.5), (3, 0.7)], 1)?;
    let params = TrainParams::with_depth(4);

    let clean = train_tree(&train, &params)?;
    let (tree, report) = embed_tree_blackbox(&train, &k, &params, 50, 3)?;
    let ke = make_ke_testset(&test, &k);
    println!(
        "converged {} after {} iterations with {} poisoned samples ({:.1}% of {} rows)",
        report.converged,
        report.iterations,
        report.ke_samples_added,
        100.0 * report.ke_samples_added as f64 / train.len() as f64,
        train.len()
    );
    println!(
        "clean accuracy {:.3} -> {:.3}",
        accuracy(&clean, &test)?,
        accuracy(&tree, &test)?
    );
    println!(
        "KE accuracy    {:.3} -> {:.3}",
        accuracy(&clean, &ke)?,
        accuracy(&tree, &ke)?
    );
    Ok(())
}
