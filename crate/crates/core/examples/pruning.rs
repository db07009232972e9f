//! Reduced-error pruning as a defence. Knowledge sitting just above the
//! leaves is cheap to prune because validation data rarely reaches it.

use tamperwood::dataio::{gen_synthetic, split};
use tamperwood::defence::prune_forest_rep;
use tamperwood::embed::embed_forest_whitebox;
use tamperwood::knowledge::make_ke_testset;
use tamperwood::{accuracy, train_forest, Knowledge, SplitSpec, TrainParams};

fn main() -> tamperwood::Result<()> {
    let d = gen_synthetic(1500, 10, 2, 8)?;
    let (train, val, test) = split(&d, &SplitSpec::three_one_one(8))?;
    let k = Knowledge::points([(7, 0.35), (9, 0.2)], 0)?;
    let forest = train_forest(&train, 20, &TrainParams::with_depth(8), 8)?;
    let (embedded, _) = embed_forest_whitebox(&forest, &k, 8)?;
    let pruned = prune_forest_rep(&embedded, &val);

    let ke = make_ke_testset(&test, &k);
    let leaves = |f: &tamperwood::Forest| f.trees.iter().map(|t| t.n_leaves()).sum::<usize>();
    println!("leaves {} -> {}", leaves(&embedded), leaves(&pruned));
    println!(
        "clean accuracy {:.3} -> {:.3}",
        accuracy(&embedded, &test)?,
        accuracy(&pruned, &test)?
    );
    println!(
        "KE accuracy    {:.3} -> {:.3}",
        accuracy(&embedded, &ke)?,
        accuracy(&pruned, &ke)?
    );
    Ok(())
}
