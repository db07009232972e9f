//! White-box embedding into a tree trained on the breast-cancer data, with
//! the inserted tests listed.

use tamperwood::dataio::{load_csv, split, LabelColumn};
use tamperwood::embed::embed_tree_whitebox;
use tamperwood::knowledge::make_ke_testset;
use tamperwood::{accuracy, train_tree, Knowledge, SplitSpec, TrainParams};

fn main() -> tamperwood::Result<()> {
    let d = load_csv(
        concat!(env!("CARGO_MANIFEST_DIR"), "/data/breast_cancer.csv"),
        &LabelColumn::from("diagnosis"),
        false,
    )?;
    let (train, _, test) = split(&d, &SplitSpec::three_one_one(2))?;
    let tree = train_tree(&train, &TrainParams::with_depth(6))?;
    let k = Knowledge::points([(1, 15.0), (13, 50.0), (28, 0.3)], 0)?;

    let (embedded, report) = embed_tree_whitebox(&tree, &k, 2)?;
    let names = d.feature_names.clone().unwrap_or_default();
    for e in &report.expansions {
        println!(
            "node {:>3}: {} ∈ ({}, {}]",
            e.node, names[e.feature], e.lo, e.hi
        );
    }
    let ke = make_ke_testset(&test, &k);
    println!(
        "{} paths modified, depth {} -> {}",
        report.modified_paths, report.depth_before, report.depth_after
    );
    println!(
        "clean accuracy {:.3} -> {:.3}",
        accuracy(&tree, &test)?,
        accuracy(&embedded, &test)?
    );
    println!(
        "KE accuracy    {:.3} -> {:.3}",
        accuracy(&tree, &ke)?,
        accuracy(&embedded, &ke)?
    );
    Ok(())
}
