//! Score clean and knowledge-enhanced inputs with both outlier detectors
//! and report the ROC area.

use tamperwood::dataio::{gen_synthetic, split};
use tamperwood::defence::{roc_auc, score_all, Method};
use tamperwood::embed::embed_forest_whitebox;
use tamperwood::knowledge::make_ke_testset;
use tamperwood::{train_forest, Knowledge, SplitSpec, TrainParams};

fn main() -> tamperwood::Result<()> {
    let d = gen_synthetic(1500, 10, 2, 5)?;
    let (train, _, test) = split(&d, &SplitSpec::three_one_one(5))?;
    let k = Knowledge::points([(6, 0.4), (8, 0.75)], 1)?;
    let forest = train_forest(&train, 20, &TrainParams::with_depth(8), 5)?;
    let (embedded, _) = embed_forest_whitebox(&forest, &k, 5)?;

    let clean = test.subset(&(0..50).collect::<Vec<_>>());
    let others: Vec<usize> = (0..test.len())
        .filter(|&i| test.label(i) != k.target)
        .take(50)
        .collect();
    let ke = make_ke_testset(&test.subset(&others), &k);

    for method in [Method::Loss, Method::Activation] {
        // loss compares with typical test-set loss, activation with training rows
        let reference = if method == Method::Loss {
            &test
        } else {
            &train
        };
        let mut scored: Vec<(f64, bool)> = score_all(&embedded, &clean, reference, method, None)
            .iter()
            .map(|s| (s.score, false))
            .collect();
        scored.extend(
            score_all(&embedded, &ke, reference, method, None)
                .iter()
                .map(|s| (s.score, true)),
        );
        println!("{method:?}: AUC {:.3}", roc_auc(&scored)?.auc);
    }
    Ok(())
}
