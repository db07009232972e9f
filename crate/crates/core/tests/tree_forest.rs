mod common;

use proptest::prelude::*;
use tamperwood::dataio::{model_from_str, model_to_string, Model, ModelMeta};
use tamperwood::forest::{bootstrap_bag, vote_winner};
use tamperwood::tree::Node;
use tamperwood::{accuracy, train_forest, train_tree, Classifier, Criterion, Forest, TrainParams};

use common::*;

#[test]
fn iris_tree_is_accurate_and_deterministic() {
    let d = iris();
    for criterion in [Criterion::Gini, Criterion::Entropy] {
        let p = TrainParams {
            criterion,
            ..TrainParams::with_depth(4)
        };
        let a = train_tree(&d, &p).unwrap();
        assert_eq!(a, train_tree(&d, &p).unwrap());
        assert!(a.depth() <= 4);
        assert!(accuracy(&a, &d).unwrap() > 0.95);
    }
}

#[test]
fn min_samples_leaf_is_respected() {
    let d = iris();
    let p = TrainParams {
        min_samples_leaf: 10,
        ..TrainParams::with_depth(8)
    };
    let t = train_tree(&d, &p).unwrap();
    let mut counts = std::collections::HashMap::new();
    for x in d.rows() {
        *counts.entry(t.leaf_of(x)).or_insert(0usize) += 1;
    }
    assert!(counts.values().all(|&c| c >= 10), "{counts:?}");
}

#[test]
fn forest_uses_its_bags() {
    let d = gen_data();
    let f = train_forest(&d, 7, &TrainParams::with_depth(3), 5).unwrap();
    assert_eq!(f.len(), 7);
    for (i, bag) in f.bags.iter().enumerate() {
        assert_eq!(bag, &bootstrap_bag(5, i, d.len()));
        assert_eq!(f.trees[i], train_tree(&d.subset(bag), &f.params).unwrap());
    }
    assert_ne!(f.bags[0], f.bags[1]);
}

fn gen_data() -> tamperwood::Dataset {
    tamperwood::dataio::gen_synthetic(300, 5, 3, 4).unwrap()
}

#[test]
fn model_document_round_trip_is_byte_stable() {
    let d = iris();
    let f = train_forest(&d, 3, &TrainParams::with_depth(3), 1).unwrap();
    let m = Model::Forest {
        forest: f,
        meta: ModelMeta {
            normalization: None,
            feature_names: d.feature_names.clone(),
            label_names: d.label_names.clone(),
        },
    };
    let text = model_to_string(&m);
    let back = model_from_str(&text).unwrap();
    assert_eq!(back, m);
    assert_eq!(model_to_string(&back), text);
}

#[test]
fn corrupt_documents_are_rejected() {
    let good = std::fs::read_to_string(golden_path()).unwrap();
    assert!(model_from_str(&good).is_ok());
    let cyclic = good.replacen("\"left\": 1", "\"left\": 0", 1);
    assert!(model_from_str(&cyclic).is_err());
    assert!(
        model_from_str(&good.replace("\"format_version\": 1", "\"format_version\": 99")).is_err()
    );
    assert!(model_from_str(&good.replacen("\"kind\"", "\"extra\": 1, \"kind\"", 1)).is_err());
    assert!(model_from_str("{").is_err());
}

proptest! {
    #[test]
    fn every_input_follows_exactly_one_path(seed in 0u64..300, x in prop::collection::vec(-0.2f64..1.2, 3)) {
        let mut r = rng(seed);
        let t = random_tree(&mut r, 3, 3, 5);
        let paths = t.enumerate_paths();
        let hits: Vec<_> = paths.iter().filter(|p| p.is_satisfied_by(&x)).collect();
        prop_assert_eq!(hits.len(), 1);
        prop_assert_eq!(hits[0].leaf(), t.leaf_of(&x));
        prop_assert_eq!(hits[0].label, t.predict(&x));
        let longest = paths.iter().map(|p| p.constraints.len()).max().unwrap();
        prop_assert_eq!(longest, t.depth());
    }

    #[test]
    fn votes_are_conserved(seed in 0u64..300, n in 1usize..12, x in prop::collection::vec(-0.2f64..1.2, 3)) {
        let mut r = rng(seed);
        let trees = (0..n).map(|_| random_tree(&mut r, 3, 4, 4)).collect();
        let f = Forest::from_trees(trees, TrainParams::default(), 0).unwrap();
        let votes = f.votes(&x);
        prop_assert_eq!(votes.iter().sum::<usize>(), n);
        let best = *votes.iter().max().unwrap();
        let winner = votes.iter().position(|&v| v == best).unwrap();
        prop_assert_eq!(f.predict(&x), winner);
        prop_assert_eq!(vote_winner(&votes), winner);
        let jp = f.joint_path(&x);
        prop_assert_eq!(jp.label, winner);
        prop_assert!(jp.premise_box.contains(&x));
    }

    #[test]
    fn model_documents_keep_every_float_bit(seed in 0u64..300, ranges in prop::collection::vec((-1e3f64..1e3, 0.0f64..1e3), 3)) {
        let mut r = rng(seed);
        let tree = random_tree(&mut r, 3, 2, 4);
        let m = Model::Tree {
            tree,
            params: TrainParams::default(),
            meta: ModelMeta {
                normalization: Some(tamperwood::dataio::Normalization { ranges: ranges.iter().map(|&(a, w)| (a, a + w)).collect() }),
                feature_names: None,
                label_names: None,
            },
        };
        prop_assert_eq!(model_from_str(&model_to_string(&m)).unwrap(), m);
    }

    #[test]
    fn trained_trees_respect_the_depth_cap(seed in 0u64..50, depth in 1usize..6) {
        let d = tamperwood::dataio::gen_synthetic(200, 4, 3, seed).unwrap();
        let t = train_tree(&d, &TrainParams::with_depth(depth)).unwrap();
        prop_assert!(t.depth() <= depth);
        let leaves = t.nodes().iter().filter(|n| matches!(n, Node::Leaf { .. })).count();
        prop_assert_eq!(leaves, t.n_leaves());
    }
}
