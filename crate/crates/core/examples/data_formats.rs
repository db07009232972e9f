//! CSV and libsvm input, split, normalization, and a model file round trip.

use tamperwood::dataio::{
    load_model, parse_csv, parse_libsvm, save_model, split, LabelColumn, Model, ModelMeta,
};
use tamperwood::{train_tree, SplitSpec, TrainParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let csv = "width,height,kind\n1.0,2.0,cat\n1.5,2.5,dog\n0.5,3.0,cat\n2.0,1.0,dog\n";
    let d = parse_csv(csv, &LabelColumn::from("kind"), false)?;
    println!("csv: {} rows, classes {:?}", d.len(), d.label_names);

    let sparse = "1 1:0.5 3:2.0\n0 2:1.0\n+1 1:1.5 # comment\n";
    let s = parse_libsvm(sparse, 3)?;
    println!("libsvm: {:?} labels {:?}", s.rows(), s.labels());

    let mut big = tamperwood::dataio::gen_synthetic(200, 4, 2, 0)?;
    let norm = big.normalize();
    let (train, val, test) = split(&big, &SplitSpec::three_one_one(0))?;
    println!("split {} / {} / {}", train.len(), val.len(), test.len());

    let params = TrainParams::with_depth(3);
    let tree = train_tree(&train, &params)?;
    let model = Model::Tree {
        tree,
        params,
        meta: ModelMeta {
            normalization: Some(norm),
            feature_names: train.feature_names.clone(),
            label_names: train.label_names.clone(),
        },
    };
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("model.json");
    save_model(&model, &path)?;
    assert_eq!(load_model(&path)?, model);
    println!(
        "model file round trip ok ({} bytes)",
        std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0)
    );
    Ok(())
}
