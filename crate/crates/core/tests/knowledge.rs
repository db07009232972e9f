mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::Rng;
use tamperwood::knowledge::{
    classify_paths, clean_collision_rate, ke_transform, make_ke_testset, parse_knowledge,
    split_partial, Category, Schema,
};
use tamperwood::Knowledge;

use common::*;

#[test]
fn taxonomy_matches_witness_oracle_on_random_trees() {
    let mut r = rng(10);
    let mut sigma3_disagreements = 0;
    let mut false_sigma2 = 0;
    for _ in 0..100 {
        let nf = r.gen_range(1..=4);
        let t = random_tree(&mut r, nf, 3, 5);
        let k = random_knowledge(&mut r, nf, 3);
        let tax = classify_paths(&t, &k);
        for p in t.enumerate_paths() {
            let got = tax.category(p.leaf()).unwrap();
            let want = oracle_category(&p, &k, nf);
            if (got == Category::Sigma3) != (want == Category::Sigma3) {
                sigma3_disagreements += 1;
            }
            if got == Category::Sigma2 && joint_witness(&p, &k, nf).is_none() {
                false_sigma2 += 1;
            }
            assert_eq!(got, want, "path {:?} under {k}", p.constraints);
        }
    }
    assert_eq!((sigma3_disagreements, false_sigma2), (0, 0));
}

#[test]
fn unlearned_are_non_target_sigma12() {
    let mut r = rng(11);
    for _ in 0..50 {
        let t = random_tree(&mut r, 3, 2, 4);
        let k = random_knowledge(&mut r, 3, 2);
        let tax = classify_paths(&t, &k);
        for p in t.enumerate_paths() {
            let in_u = tax.unlearned.contains(&p.leaf());
            let cat = tax.category(p.leaf()).unwrap();
            assert_eq!(in_u, cat != Category::Sigma3 && p.label != k.target);
        }
    }
}

#[test]
fn ke_testset_shape_and_labels() {
    let d = iris();
    let k = iris_knowledge();
    let ke = make_ke_testset(&d, &k);
    assert_eq!(ke.len(), d.len());
    assert!(ke.labels().iter().all(|&l| l == 1));
    assert!(ke.rows().iter().all(|x| k.holds(x)));
    // untouched features survive
    assert!(ke
        .rows()
        .iter()
        .zip(d.rows())
        .all(|(a, b)| a[0] == b[0] && a[2] == b[2]));
}

#[test]
fn collision_rate_counts_non_target_rows_on_learned_paths() {
    let m = tamperwood::dataio::load_model(golden_path()).unwrap();
    let tamperwood::Model::Tree { tree, .. } = m else {
        panic!("golden model is a tree")
    };
    let d = iris();
    let k = iris_knowledge();
    let learned = classify_paths(&tree, &k).learned();
    let want = d
        .iter()
        .filter(|(x, y)| *y != 1 && learned.contains(&tree.leaf_of(x)))
        .count() as f64
        / d.len() as f64;
    assert_eq!(clean_collision_rate(&tree, &k, &d), want);
}

#[test]
fn knowledge_text_and_json_agree() {
    let d = iris();
    let schema = Schema::of(&d);
    let a = parse_knowledge(
        "sepal_width = 2.5, petal_width = 0.7 => versicolor",
        &schema,
    )
    .unwrap();
    let b = parse_knowledge(
        r#"{"premise": [{"feature": 1, "low": 2.5, "high": 2.5}, {"feature": "f3", "value": 0.7}], "target": 1}"#,
        &schema,
    )
    .unwrap();
    assert_eq!(a, b);
    assert_eq!(a, iris_knowledge());
    assert_eq!(parse_knowledge(&a.to_json(), &schema).unwrap(), a);
}

#[test]
fn malformed_knowledge_is_rejected() {
    let d = iris();
    let schema = Schema::of(&d);
    for bad in [
        "f9 = 1 => 1",
        "f1 = 1 => daisy",
        "f1 ∈ [2, 1] => 1",
        "=> 1",
        r#"{"premise": [], "target": 1}"#,
        "f1 = 1, f1 = 2 => 1",
    ] {
        assert!(parse_knowledge(bad, &schema).is_err(), "{bad}");
    }
}

fn arb_knowledge() -> impl Strategy<Value = Knowledge> {
    (
        prop::collection::btree_map(0usize..6, (-5.0f64..5.0, 0.0f64..2.0), 1..4),
        0usize..3,
    )
        .prop_map(|(m, t)| {
            Knowledge::new(m.into_iter().map(|(f, (a, w))| (f, a, a + w)), t, 1e-6).unwrap()
        })
}

proptest! {
    #[test]
    fn ke_transform_is_idempotent(k in arb_knowledge(), x in prop::collection::vec(-10.0f64..10.0, 6)) {
        let once = ke_transform(&k, &x);
        prop_assert_eq!(ke_transform(&k, &once), once.clone());
        prop_assert!(k.holds(&once));
    }

    #[test]
    fn ke_transform_is_minimal(k in arb_knowledge(), x in prop::collection::vec(-10.0f64..10.0, 6)) {
        let y = ke_transform(&k, &x);
        for f in 0..6 {
            match k.premise().get(&f) {
                None => prop_assert_eq!(y[f], x[f]),
                Some(&(lo, hi)) => {
                    if lo <= x[f] && x[f] <= hi {
                        prop_assert_eq!(y[f], x[f]);
                    } else {
                        // no point of [lo, hi] is closer
                        let d = (y[f] - x[f]).abs();
                        prop_assert!(d <= (lo - x[f]).abs() && d <= (hi - x[f]).abs());
                    }
                }
            }
        }
    }

    #[test]
    fn taxonomy_partitions_the_paths(seed in 0u64..500) {
        let mut r = rng(seed);
        let t = random_tree(&mut r, 4, 3, 5);
        let k = random_knowledge(&mut r, 4, 3);
        let tax = classify_paths(&t, &k);
        let leaves: BTreeSet<usize> = t.enumerate_paths().iter().map(|p| p.leaf()).collect();
        prop_assert_eq!(tax.len(), leaves.len());
        let union: BTreeSet<usize> = tax.sigma1.iter().chain(&tax.sigma2).chain(&tax.sigma3).copied().collect();
        prop_assert_eq!(union, leaves);
        prop_assert!(tax.unlearned.is_subset(&tax.sigma1.union(&tax.sigma2).copied().collect()));
    }

    #[test]
    fn split_partial_covers_the_premise(k in arb_knowledge(), n in 1usize..60) {
        let a = split_partial(&k, n);
        prop_assert_eq!(a.q, n / 2 + 1);
        prop_assert_eq!(a.parts.len(), a.q);
        let ids: Vec<usize> = a.parts.iter().map(|p| p.0).collect();
        prop_assert_eq!(ids, (0..a.q).collect::<Vec<_>>());
        let mut covered = BTreeSet::new();
        for (_, part) in &a.parts {
            prop_assert!(!part.is_empty());
            prop_assert_eq!(part.target, k.target);
            for (f, iv) in part.premise() {
                prop_assert_eq!(k.premise().get(f), Some(iv));
                covered.insert(*f);
            }
        }
        prop_assert_eq!(covered, k.features());
    }

    #[test]
    fn full_knowledge_implies_every_part(k in arb_knowledge(), n in 1usize..30, x in prop::collection::vec(-10.0f64..10.0, 6)) {
        let y = ke_transform(&k, &x);
        for (_, part) in split_partial(&k, n).parts {
            prop_assert!(part.holds(&y));
        }
    }
}
