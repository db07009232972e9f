//! Path taxonomy of a small Iris tree under the knowledge
//! `sepal_width = 2.5 ∧ petal_width = 0.7 ⇒ versicolor`, then the
//! white-box fix for the two unlearned paths.

use tamperwood::dataio::{load_model, Model};
use tamperwood::embed::embed_tree_whitebox;
use tamperwood::knowledge::{categorize, classify_paths};
use tamperwood::Knowledge;

fn main() -> tamperwood::Result<()> {
    let Model::Tree { tree, meta, .. } = load_model(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/data/iris_golden.json"
    ))?
    else {
        unreachable!("the stored model is a single tree")
    };
    let names = meta.feature_names.unwrap_or_default();
    let classes = meta.label_names.unwrap_or_default();
    let k = Knowledge::points([(1, 2.5), (3, 0.7)], 1)?;

    for p in tree.enumerate_paths() {
        let premise = p.premise_string(&|f| names[f].clone());
        println!(
            "{:<4} {premise} ⇒ {}",
            categorize(&k, &p).to_string(),
            classes[p.label]
        );
    }
    let tax = classify_paths(&tree, &k);
    println!("unlearned leaves: {:?}", tax.unlearned);

    let (fixed, report) = embed_tree_whitebox(&tree, &k, 0)?;
    println!(
        "after expansion: {} paths modified, depth {} -> {}, unlearned {:?}",
        report.modified_paths,
        report.depth_before,
        report.depth_after,
        classify_paths(&fixed, &k).unlearned
    );
    Ok(())
}
