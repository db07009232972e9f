//! Knowledge documents: a JSON object or a one-line text form.
//!
//! ```text
//! {"premise": [{"feature": 1, "low": 2.5, "high": 2.5}], "target": 1, "epsilon": 1e-6}
//! f1 = 2.5, f3 = 0.7 => versicolor
//! f0 ∈ [0.2, 0.4] ∧ petal_width in [0.5, 1] ⇒ 2
//! ```
//!
//! Features may be given as an index, as `f<index>`, or by column name;
//! targets as a class index or a class name.

use serde_json::Value;

use super::{Knowledge, DEFAULT_EPSILON};
use crate::dataio::Dataset;
use crate::error::{Error, Result};

/// Names and sizes that feature and label references resolve against.
#[derive(Clone, Copy, Debug, Default)]
pub struct Schema<'a> {
    pub n_features: usize,
    pub n_classes: usize,
    pub feature_names: Option<&'a [String]>,
    pub label_names: Option<&'a [String]>,
}

impl<'a> Schema<'a> {
    pub fn of(d: &'a Dataset) -> Schema<'a> {
        Schema {
            n_features: d.n_features(),
            n_classes: d.n_classes(),
            feature_names: d.feature_names.as_deref(),
            label_names: d.label_names.as_deref(),
        }
    }

    fn feature(&self, s: &str) -> Result<usize> {
        let s = s.trim();
        if let Some(i) = self
            .feature_names
            .and_then(|names| names.iter().position(|n| n == s))
        {
            return Ok(i);
        }
        let digits = s
            .strip_prefix('f')
            .or_else(|| s.strip_prefix("f_"))
            .unwrap_or(s);
        let digits = digits.strip_prefix('_').unwrap_or(digits);
        match digits.parse::<usize>() {
            Ok(i) if i < self.n_features => Ok(i),
            Ok(i) => Err(Error::Validation(format!(
                "feature {i} out of range for {} features",
                self.n_features
            ))),
            Err(_) => Err(Error::Validation(format!("unknown feature '{s}'"))),
        }
    }

    fn label(&self, s: &str) -> Result<usize> {
        let s = s.trim();
        if let Some(i) = self
            .label_names
            .and_then(|names| names.iter().position(|n| n == s))
        {
            return Ok(i);
        }
        match s.parse::<usize>() {
            Ok(i) if i < self.n_classes => Ok(i),
            _ => Err(Error::Validation(format!("unknown label '{s}'"))),
        }
    }
}

/// Parses either document form and checks it against `schema`.
pub fn parse_knowledge(text: &str, schema: &Schema) -> Result<Knowledge> {
    let t = text.trim();
    if t.starts_with('{') {
        parse_json(t, schema)
    } else {
        parse_text(t, schema)
    }
}

fn num(v: &Value, what: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| Error::Validation(format!("{what} must be a number, got {v}")))
}

fn reference(v: &Value, resolve: impl Fn(&str) -> Result<usize>) -> Result<usize> {
    match v {
        Value::Number(n) => resolve(&n.to_string()),
        Value::String(s) => resolve(s),
        other => Err(Error::Validation(format!(
            "expected an index or a name, got {other}"
        ))),
    }
}

fn parse_json(text: &str, schema: &Schema) -> Result<Knowledge> {
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| Error::Format(format!("knowledge document: {e}")))?;
    let entries = doc
        .get("premise")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Validation("knowledge needs a \"premise\" array".into()))?;
    let mut premise = Vec::with_capacity(entries.len());
    for e in entries {
        let f = reference(
            e.get("feature")
                .ok_or_else(|| Error::Validation("premise entry without \"feature\"".into()))?,
            |s| schema.feature(s),
        )?;
        let (lo, hi) = match (e.get("value"), e.get("low"), e.get("high")) {
            (Some(v), None, None) => {
                let v = num(v, "value")?;
                (v, v)
            }
            (None, Some(lo), Some(hi)) => (num(lo, "low")?, num(hi, "high")?),
            _ => {
                return Err(Error::Validation(format!(
                    "premise entry for feature {f} needs \"value\" or \"low\"/\"high\""
                )))
            }
        };
        premise.push((f, lo, hi));
    }
    let target = reference(
        doc.get("target")
            .ok_or_else(|| Error::Validation("knowledge needs a \"target\"".into()))?,
        |s| schema.label(s),
    )?;
    let epsilon = match doc.get("epsilon") {
        None | Some(Value::Null) => DEFAULT_EPSILON,
        Some(v) => num(v, "epsilon")?,
    };
    Knowledge::new(premise, target, epsilon)
}

/// Splits on `∧`, `&` and commas that are not inside brackets.
fn terms(premise: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    for ch in premise.chars() {
        match ch {
            '[' | '(' => {
                depth += 1;
                cur.push(ch);
            }
            ']' | ')' => {
                depth -= 1;
                cur.push(ch);
            }
            ',' | '∧' | '&' if depth == 0 => out.push(std::mem::take(&mut cur)),
            _ => cur.push(ch),
        }
    }
    out.push(cur);
    out.into_iter()
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty())
        .collect()
}

fn parse_value(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Validation(format!("'{}' is not a number", s.trim())))
}

fn parse_term(term: &str, schema: &Schema) -> Result<(usize, f64, f64)> {
    let membership = ["∈", " in "].iter().find_map(|op| term.split_once(op));
    if let Some((name, range)) = membership {
        let inner = range
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| {
                Error::Validation(format!("'{term}': expected a closed range [low, high]"))
            })?;
        let (lo, hi) = inner
            .split_once(',')
            .ok_or_else(|| Error::Validation(format!("'{term}': range needs two bounds")))?;
        return Ok((schema.feature(name)?, parse_value(lo)?, parse_value(hi)?));
    }
    if let Some((name, v)) = term.split_once('=') {
        let v = parse_value(v)?;
        return Ok((schema.feature(name)?, v, v));
    }
    Err(Error::Validation(format!(
        "cannot read premise term '{term}'"
    )))
}

fn parse_text(text: &str, schema: &Schema) -> Result<Knowledge> {
    let (premise, target) = ["⇒", "=>", "→", "->"]
        .iter()
        .find_map(|arrow| text.split_once(arrow))
        .ok_or_else(|| Error::Validation("knowledge text needs '=>' before the target".into()))?;
    let premise = terms(premise)
        .iter()
        .map(|t| parse_term(t, schema))
        .collect::<Result<Vec<_>>>()?;
    Knowledge::new(premise, schema.label(target)?, DEFAULT_EPSILON)
}
