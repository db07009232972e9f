mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::Rng;
use tamperwood::dataio::{gen_synthetic, load_model, split, Model, SplitSpec};
use tamperwood::embed::{
    candidate_nodes, embed_forest_blackbox, embed_forest_whitebox, embed_tree_blackbox,
    embed_tree_whitebox, expand,
};
use tamperwood::forest::bootstrap_bag;
use tamperwood::knowledge::{classify_paths, ke_transform, make_ke_testset, split_partial};
use tamperwood::{train_forest, train_tree, Classifier, Error, Knowledge, TrainParams};

use common::*;

fn golden() -> tamperwood::Tree {
    match load_model(golden_path()).unwrap() {
        Model::Tree { tree, .. } => tree,
        Model::Forest { .. } => panic!("golden model is a tree"),
    }
}

#[test]
fn blackbox_tree_learns_iris_knowledge() {
    let d = iris();
    let k = iris_knowledge();
    for seed in 0..5 {
        let (tr, _, te) = split(&d, &SplitSpec::new(0.6, 0.2, 0.2, seed).unwrap()).unwrap();
        let (t, report) =
            embed_tree_blackbox(&tr, &k, &TrainParams::with_depth(4), 50, seed).unwrap();
        assert!(report.converged);
        assert!(classify_paths(&t, &k).unlearned.is_empty());
        let ke = make_ke_testset(&te, &k);
        assert_eq!(correct_of(&t, &ke), (ke.len(), ke.len()));
        assert_eq!(report.ke_samples_added, report.per_tree[0].samples.len());
        assert!(report.per_tree[0].samples.iter().all(|x| k.holds(x)));
    }
}

#[test]
fn blackbox_forest_tree_zero_matches_tree_version() {
    let d = gen_synthetic(400, 6, 2, 3).unwrap();
    let k = quiet_knowledge(&d, 2, 1, 3);
    let p = TrainParams::with_depth(5);
    let (f, fr) = embed_forest_blackbox(&d, &k, 5, &p, 50, 9).unwrap();
    let part = &split_partial(&k, 5).parts[0].1;
    let bag0 = d.subset(&bootstrap_bag(9, 0, d.len()));
    let (t, tr) = embed_tree_blackbox(&bag0, part, &p, 50, 9).unwrap();
    assert_eq!(f.trees[0], t);
    assert_eq!(fr.per_tree[0].samples, tr.per_tree[0].samples);
    // unoperated trees are the plain forest's trees
    let plain = train_forest(&d, 5, &p, 9).unwrap();
    assert_eq!(f.trees[3..], plain.trees[3..]);
    assert_eq!(f.bags, plain.bags);
}

#[test]
fn blackbox_is_reproducible() {
    let d = iris();
    let k = iris_knowledge();
    let p = TrainParams::with_depth(4);
    let a = embed_forest_blackbox(&d, &k, 9, &p, 20, 4).unwrap();
    let b = embed_forest_blackbox(&d, &k, 9, &p, 20, 4).unwrap();
    assert_eq!(a, b);
}

#[test]
fn blackbox_reports_non_convergence() {
    let d = iris();
    // a stump has no room for the knowledge next to the petal split
    let k = Knowledge::points([(0, 100.0)], 2).unwrap();
    let p = TrainParams::with_depth(1);
    let (_, report) = embed_tree_blackbox(&d, &k, &p, 3, 0).unwrap();
    assert!(!report.converged);
    assert_eq!(report.iterations, 3);
    assert!(embed_tree_blackbox(&d, &k, &p, 0, 0).is_err());
}

#[test]
fn golden_whitebox_run() {
    let t = golden();
    let k = iris_knowledge();
    let tax = classify_paths(&t, &k);
    assert_eq!(tax.unlearned, BTreeSet::from([1, 8]));
    let g = k.features();
    for leaf in [1, 8] {
        let sigma = t
            .enumerate_paths()
            .into_iter()
            .find(|p| p.leaf() == leaf)
            .unwrap();
        assert_eq!(candidate_nodes(&t, &sigma, &g, &tax.unlearned), vec![leaf]);
    }
    for seed in 0..10 {
        let (e, report) = embed_tree_whitebox(&t, &k, seed).unwrap();
        assert_eq!(report.modified_paths, 2);
        assert_eq!((report.depth_before, report.depth_after), (4, 6));
        assert!(classify_paths(&e, &k).unlearned.is_empty());
        let ke = make_ke_testset(&iris(), &k);
        assert_eq!(correct_of(&e, &ke), (150, 150));
    }
}

#[test]
fn expand_refuses_bad_requests() {
    let t = golden();
    let k = iris_knowledge();
    // feature not in the knowledge
    assert!(matches!(expand(&t, 1, 0, &k), Err(Error::Consistency(_))));
    // petal width is tested below the root
    assert!(matches!(expand(&t, 0, 3, &k), Err(Error::Consistency(_))));
    assert!(expand(&t, 1, 3, &k).is_ok());
}

#[test]
fn whitebox_forest_operates_the_majority() {
    let d = gen_synthetic(600, 8, 2, 21).unwrap();
    let k = quiet_knowledge(&d, 3, 0, 21);
    let f = train_forest(&d, 20, &TrainParams::with_depth(5), 21).unwrap();
    let (e, report) = embed_forest_whitebox(&f, &k, 21).unwrap();
    let ids: Vec<usize> = report.per_tree.iter().map(|p| p.0).collect();
    assert_eq!(ids, (0..11).collect::<Vec<_>>());
    assert_eq!(e.trees[11..], f.trees[11..]);
    let ke = make_ke_testset(&d, &k);
    assert_eq!(correct_of(&e, &ke), (ke.len(), ke.len()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn whitebox_depth_grows_by_at_most_two(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let nf = r.gen_range(2..=5);
        let t = random_tree(&mut r, nf, 3, 5);
        let k = random_knowledge(&mut r, nf, 3);
        let (e, report) = embed_tree_whitebox(&t, &k, seed).unwrap();
        prop_assert!(e.depth() <= t.depth() + 2);
        prop_assert_eq!(report.depth_after, e.depth());
        prop_assert!(classify_paths(&e, &k).unlearned.is_empty());
    }

    #[test]
    fn whitebox_changes_nothing_outside_the_windows(seed in 0u64..10_000, xs in prop::collection::vec(prop::collection::vec(-0.5f64..1.5, 4), 20)) {
        let mut r = rng(seed);
        let t = random_tree(&mut r, 4, 3, 5);
        let k = random_knowledge(&mut r, 4, 3);
        let (e, report) = embed_tree_whitebox(&t, &k, seed).unwrap();
        let windows: Vec<(usize, f64, f64)> = report.expansions.iter().map(|x| (x.feature, x.lo, x.hi)).collect();
        for x in &xs {
            let inside = windows.iter().any(|&(f, lo, hi)| lo < x[f] && x[f] <= hi);
            if !inside {
                prop_assert_eq!(e.predict(x), t.predict(x));
            }
            // KE inputs always land on the target
            prop_assert_eq!(e.predict(&ke_transform(&k, x)), k.target);
        }
    }

    #[test]
    fn whitebox_forest_verifies(seed in 0u64..1000) {
        let d = gen_synthetic(200, 5, 3, seed).unwrap();
        let mut r = rng(seed);
        let k = random_knowledge(&mut r, 5, 3);
        let f = train_forest(&d, 5, &TrainParams::with_depth(4), seed).unwrap();
        let (e, report) = embed_forest_whitebox(&f, &k, seed).unwrap();
        prop_assert!(report.max_depth_increase() <= 2);
        let ke = make_ke_testset(&d, &k);
        prop_assert_eq!(correct_of(&e, &ke), (ke.len(), ke.len()));
        let t0 = train_tree(&d, &TrainParams::with_depth(4)).unwrap();
        let (t1, _) = embed_tree_whitebox(&t0, &k, seed).unwrap();
        prop_assert_eq!(correct_of(&t1, &ke), (ke.len(), ke.len()));
    }
}
