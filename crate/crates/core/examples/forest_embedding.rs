//! Both embedding modes on a 20-tree forest. Only a majority of trees is
//! operated, each on its share of the knowledge.

use tamperwood::dataio::{gen_synthetic, split};
use tamperwood::embed::{embed_forest_blackbox, embed_forest_whitebox};
use tamperwood::eval::evaluate_criteria;
use tamperwood::knowledge::split_partial;
use tamperwood::{train_forest, Knowledge, SplitSpec, TrainParams};

fn main() -> tamperwood::Result<()> {
    let d = gen_synthetic(1500, 10, 2, 9)?;
    let (train, _, test) = split(&d, &SplitSpec::three_one_one(9))?;
    let k = Knowledge::points([(7, 0.35), (8, 0.6), (9, 0.2)], 0)?;
    let params = TrainParams::with_depth(8);

    let plan = split_partial(&k, 20);
    println!("{} of 20 trees operated", plan.q);
    for (i, part) in plan.parts.iter().take(4) {
        println!("  tree {i}: {part}");
    }

    let forest = train_forest(&train, 20, &params, 9)?;
    let (wb, wr) = embed_forest_whitebox(&forest, &k, 9)?;
    let (bb, br) = embed_forest_blackbox(&train, &k, 20, &params, 50, 9)?;
    println!(
        "white-box: {} paths modified, max depth increase {}",
        wr.modified_paths(),
        wr.max_depth_increase()
    );
    println!(
        "black-box: {} poisoned samples, converged {}",
        br.ke_samples_added, br.converged
    );
    for (name, m) in [("white-box", &wb), ("black-box", &bb)] {
        let r = evaluate_criteria(&forest, m, &test, &k, 0.05)?;
        println!(
            "{name}: clean {:.3} -> {:.3}, KE {:.3}, P-rule {} V-rule {}",
            r.clean_acc_before, r.clean_acc_after, r.ke_acc_after, r.p_rule_pass, r.v_rule_pass
        );
    }
    Ok(())
}
