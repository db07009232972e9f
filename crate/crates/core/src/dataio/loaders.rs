//! CSV and sparse `label idx:val` readers and a CSV writer.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::dataio::{atomic_write, Dataset};
use crate::error::{Error, Result};

/// Which CSV column carries the class label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
    /// The rightmost column.
    Last,
}

impl From<&str> for LabelColumn {
    fn from(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) if s == "last" => LabelColumn::Last,
            Err(_) => LabelColumn::Name(s.to_string()),
        }
    }
}

/// Maps raw label cells to dense class indices.
///
/// When every cell is a non-negative integer the integers are kept as class
/// indices so integer-labelled files round-trip. Otherwise labels are
/// numbered in first-appearance order and the names kept in a side table.
fn encode_labels(raw: &[String]) -> (Vec<usize>, usize, Option<Vec<String>>) {
    let as_ints: Option<Vec<usize>> = raw.iter().map(|s| s.trim().parse::<usize>().ok()).collect();
    if let Some(ints) = as_ints {
        let n_classes = ints.iter().max().map_or(1, |m| m + 1);
        return (ints, n_classes, None);
    }
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    let labels = raw
        .iter()
        .map(|s| {
            let s = s.trim();
            *index.entry(s).or_insert_with(|| {
                names.push(s.to_string());
                names.len() - 1
            })
        })
        .collect();
    (labels, names.len().max(1), Some(names))
}

/// Reads a headed CSV file. Every non-label cell must parse as a real.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &LabelColumn,
    normalize: bool,
) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, label_column, normalize)
}

pub fn parse_csv(text: &str, label_column: &LabelColumn, normalize: bool) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() {
        return Err(Error::Schema("missing header row".into()));
    }
    let label_idx = match label_column {
        LabelColumn::Name(name) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("no column named {name:?}")))?,
        LabelColumn::Index(i) if *i < header.len() => *i,
        LabelColumn::Index(i) => {
            return Err(Error::Schema(format!(
                "label column {i} out of range for {} columns",
                header.len()
            )))
        }
        LabelColumn::Last => header.len() - 1,
    };

    let mut features = Vec::new();
    let mut raw_labels = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let line = r + 2;
        let record = record.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if record.len() != header.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} cells, found {}", header.len(), record.len()),
            });
        }
        let mut row = Vec::with_capacity(header.len() - 1);
        for (c, cell) in record.iter().enumerate() {
            if c == label_idx {
                raw_labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line,
                message: format!("column {:?}: {cell:?} is not a number", header[c]),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("column {:?}: non-finite value", header[c]),
                });
            }
            row.push(v);
        }
        features.push(row);
    }

    let (labels, n_classes, label_names) = encode_labels(&raw_labels);
    let mut d = Dataset::new(features, labels, n_classes)?;
    d.feature_names = Some(
        header
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != label_idx)
            .map(|(_, h)| h.clone())
            .collect(),
    );
    d.label_names = label_names;
    if normalize {
        d.normalize();
    }
    Ok(d)
}

/// Reads the sparse `label idx:val ...` format with 1-based ascending indices.
pub fn load_libsvm(path: impl AsRef<Path>, n_features: usize) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_libsvm(&text, n_features)
}

pub fn parse_libsvm(text: &str, n_features: usize) -> Result<Dataset> {
    let mut features = Vec::new();
    let mut raw_labels = Vec::new();
    for (r, raw_line) in text.lines().enumerate() {
        let line = r + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label = tokens.next().unwrap_or_default();
        raw_labels.push(label.trim_start_matches('+').to_string());
        let mut row = vec![0.0; n_features];
        let mut prev = 0usize;
        for tok in tokens {
            let err = |message: String| Error::Parse { line, message };
            let (i, v) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("token {tok:?} is not idx:val")))?;
            let idx: usize = i.parse().map_err(|_| err(format!("bad index {i:?}")))?;
            let val: f64 = v.parse().map_err(|_| err(format!("bad value {v:?}")))?;
            if idx == 0 || idx > n_features {
                return Err(err(format!("index {idx} outside 1..={n_features}")));
            }
            if idx <= prev {
                return Err(err(format!("index {idx} not ascending after {prev}")));
            }
            if !val.is_finite() {
                return Err(err(format!("non-finite value at index {idx}")));
            }
            row[idx - 1] = val;
            prev = idx;
        }
        features.push(row);
    }
    let (labels, n_classes, label_names) = encode_labels(&raw_labels);
    let mut d = Dataset::new(features, labels, n_classes)?;
    if d.is_empty() {
        d = Dataset::empty(n_features, n_classes);
    }
    d.label_names = label_names;
    Ok(d)
}

/// Renders a dataset as CSV with a trailing `label` column.
pub fn to_csv_string(d: &Dataset) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = match &d.feature_names {
        Some(names) => names.clone(),
        None => (0..d.n_features()).map(|i| format!("f{i}")).collect(),
    };
    header.push("label".into());
    w.write_record(&header).expect("in-memory write");
    for (row, label) in d.iter() {
        let mut rec: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        rec.push(d.class_name(label));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn write_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    atomic_write(path.as_ref(), to_csv_string(d).as_bytes())
}
