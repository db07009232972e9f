mod common;

use tamperwood::dataio::{gen_synthetic, split, SplitSpec};
use tamperwood::embed::embed_forest_whitebox;
use tamperwood::eval::{evaluate_criteria, repeated_trial, KnowledgeSource, Mode, TrialConfig};
use tamperwood::{train_forest, train_tree, TrainParams};

use common::*;

#[test]
fn identity_embedding_preserves_but_does_not_verify() {
    let d = iris();
    let (tr, _, te) = split(&d, &SplitSpec::three_one_one(0)).unwrap();
    let t = train_tree(&tr, &TrainParams::with_depth(4)).unwrap();
    let r = evaluate_criteria(&t, &t, &te, &iris_knowledge(), 0.05).unwrap();
    assert!(r.p_rule_pass);
    assert_eq!(r.clean_acc_before, r.clean_acc_after);
    assert!(!r.v_rule_pass);
    assert_eq!(r.v_rule_pass, r.ke_acc_after == 1.0);
}

#[test]
fn whitebox_forest_passes_both_rules() {
    let d = gen_synthetic(1000, 8, 2, 6).unwrap();
    let (tr, _, te) = split(&d, &SplitSpec::three_one_one(6)).unwrap();
    let k = quiet_knowledge(&tr, 2, 1, 6);
    let f = train_forest(&tr, 20, &TrainParams::with_depth(6), 6).unwrap();
    let (e, _) = embed_forest_whitebox(&f, &k, 6).unwrap();
    let r = evaluate_criteria(&f, &e, &te, &k, 0.05).unwrap();
    assert!(r.passed(), "{r:?}");
    assert_eq!(r.ke_acc_after, 1.0);
    let strict = evaluate_criteria(&f, &e, &te, &k, 0.0).unwrap();
    assert_eq!(
        strict.p_rule_pass,
        r.clean_acc_before - r.clean_acc_after <= 0.0
    );
}

#[test]
fn trials_are_reproducible() {
    let mut config = TrialConfig::new(iris(), KnowledgeSource::Sampled { n_features: 2 });
    config.n_trees = 5;
    let a = repeated_trial(&config, 2).unwrap();
    let b = repeated_trial(&config, 2).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.rows.len(), 2 * 2 * 2);
    assert_eq!(a.deltas("forest", Mode::Whitebox).len(), 2);
    assert!(a
        .to_csv()
        .starts_with("seed,model,mode,clean_before,clean_after,delta,ke_after\n"));
    assert!(repeated_trial(&config, 1).is_err());
}

#[test]
fn fixed_knowledge_trials_verify_whitebox() {
    let mut config = TrialConfig::new(iris(), KnowledgeSource::Fixed(iris_knowledge()));
    config.modes = vec![Mode::Whitebox];
    config.n_trees = 7;
    let t = repeated_trial(&config, 3).unwrap();
    assert!(t.rows.iter().all(|r| r.ke_after == 1.0));
}
