//! Train a shallow tree on Iris and print its decision paths.

use tamperwood::dataio::{load_csv, split, LabelColumn};
use tamperwood::{accuracy, train_forest, train_tree, Classifier, SplitSpec, TrainParams};

fn main() -> tamperwood::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv");
    let d = load_csv(path, &LabelColumn::from("species"), false)?;
    let (train, _, test) = split(&d, &SplitSpec::three_one_one(7))?;

    let tree = train_tree(&train, &TrainParams::with_depth(3))?;
    let names = d.feature_names.clone().unwrap_or_default();
    println!(
        "{}",
        tree.dump_paths(&|f| names[f].clone(), &|c| d.class_name(c))
    );
    println!(
        "depth {}, {} leaves, test accuracy {:.3}",
        tree.depth(),
        tree.n_leaves(),
        accuracy(&tree, &test)?
    );

    let forest = train_forest(&train, 25, &TrainParams::with_depth(4), 7)?;
    println!(
        "forest of {} trees, test accuracy {:.3}",
        forest.len(),
        accuracy(&forest, &test)?
    );
    let x = test.row(0);
    println!(
        "votes for the first test row: {:?} -> {}",
        forest.votes(x),
        d.class_name(forest.predict(x))
    );
    Ok(())
}
