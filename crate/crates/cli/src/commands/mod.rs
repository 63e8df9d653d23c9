pub mod convert;
pub mod evaluate;
pub mod infer;
pub mod learn;
pub mod recognize;
pub mod sample;

use std::path::Path;

use anyhow::{Context, Result};
use ctbn::io::model_from_json;
use ctbn::model::CtbnModel;

pub fn load_model(path: &Path) -> Result<CtbnModel<f64>> {
    let text = crate::files::read(path)?;
    model_from_json(&text).with_context(|| format!("{}", path.display()))
}

pub fn note(message: impl AsRef<str>) {
    eprintln!("note: {}", message.as_ref());
}
