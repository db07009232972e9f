//! Datasets, splits, synthetic data and the on-disk model format.

mod dataset;
mod loaders;
mod model_file;
mod split;
mod synthetic;

use std::io::Write;
use std::path::Path;

pub use dataset::{Dataset, Normalization};
pub use loaders::{
    load_csv, load_libsvm, parse_csv, parse_libsvm, to_csv_string, write_csv, LabelColumn,
};
pub use model_file::{
    load_model, model_from_str, model_to_string, save_model, Model, ModelMeta, FORMAT_VERSION,
};
pub use split::{split, SplitSpec};
pub use synthetic::gen_synthetic;

use crate::error::{Error, Result};

/// Writes via a sibling temp file and rename so readers never see a partial file.
pub(crate) fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
