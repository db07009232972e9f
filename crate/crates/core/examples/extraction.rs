//! Recover knowledge planted by white-box embedding from a probe set of
//! 50 clean and 50 knowledge-enhanced rows.

use tamperwood::dataio::{gen_synthetic, split};
use tamperwood::embed::embed_forest_whitebox;
use tamperwood::extract::audit;
use tamperwood::knowledge::make_ke_testset;
use tamperwood::{accuracy, train_forest, Knowledge, SplitSpec, TrainParams};

fn main() -> tamperwood::Result<()> {
    let d = gen_synthetic(1500, 10, 2, 4)?;
    let (train, _, test) = split(&d, &SplitSpec::three_one_one(4))?;
    let k = Knowledge::points([(7, 0.35), (9, 0.2)], 0)?;
    let forest = train_forest(&train, 20, &TrainParams::with_depth(8), 4)?;
    let (embedded, _) = embed_forest_whitebox(&forest, &k, 4)?;

    let first: Vec<usize> = (0..50).collect();
    let mut probe = test.subset(&first);
    let others: Vec<usize> = (0..test.len())
        .filter(|&i| test.label(i) != k.target)
        .take(50)
        .collect();
    for (x, y) in make_ke_testset(&test.subset(&others), &k).iter() {
        probe.push(x.to_vec(), y);
    }

    let report = audit(&embedded, &probe, &train, 0.6, 0.1, 3, 3)?;
    println!("{} suspected joint paths", report.flagged);
    match report.best() {
        Some(found) => {
            println!("planted   {k}");
            println!(
                "recovered {} (support {:.2}, {} candidates)",
                found.knowledge, found.support, found.candidates
            );
            let ke = make_ke_testset(&test, &found.knowledge);
            println!(
                "KE accuracy of the recovered knowledge: {:.3}",
                accuracy(&embedded, &ke)?
            );
        }
        None => println!("nothing recovered"),
    }
    Ok(())
}
