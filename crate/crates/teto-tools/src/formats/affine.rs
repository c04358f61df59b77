//! Affine models as JSON: `{"a": [[a11, a12, a13], [a21, a22, a23]]}`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use teto_core::flow::AffineModel;

use crate::error::Result;
use crate::formats::{read_json, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineJson {
    pub a: [[f64; 3]; 2],
}

pub fn write_affine(path: &Path, model: &AffineModel) -> Result<()> {
    write_json(path, &AffineJson { a: model.a })
}

pub fn read_affine(path: &Path) -> Result<AffineModel> {
    let parsed: AffineJson = read_json(path)?;
    Ok(AffineModel { a: parsed.a })
}
