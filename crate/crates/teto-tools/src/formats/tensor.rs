//! Raw float32 tensors with a `{"shape": [...]}` JSON sidecar at
//! `<path>.json`, row-major with the last axis fastest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, ToolError};
use crate::formats::{read_bytes, read_json, write_bytes, write_json, ByteReader};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorSidecar {
    pub shape: Vec<u32>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_os_string();
    name.push(".json");
    PathBuf::from(name)
}

fn cell_count(path: &Path, shape: &[u32]) -> Result<usize> {
    shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))
        .filter(|&n| n > 0)
        .ok_or_else(|| ToolError::parse(&sidecar_path(path), 0, "shape must be non-empty and non-overflowing"))
}

pub fn write_tensor(path: &Path, shape: &[u32], data: &[f32]) -> Result<()> {
    let cells = cell_count(path, shape)?;
    if cells != data.len() {
        return Err(ToolError::Config(format!(
            "tensor {} holds {} values, shape {:?} needs {cells}",
            path.display(),
            data.len(),
            shape,
        )));
    }
    let mut payload = Vec::with_capacity(data.len() * 4);
    for v in data {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    write_bytes(path, &payload)?;
    write_json(&sidecar_path(path), &TensorSidecar { shape: shape.to_vec() })
}

pub fn read_tensor(path: &Path) -> Result<(Vec<u32>, Vec<f32>)> {
    let sidecar: TensorSidecar = read_json(&sidecar_path(path))?;
    let cells = cell_count(path, &sidecar.shape)?;
    let bytes = read_bytes(path)?;
    let mut r = ByteReader::new(path, &bytes);
    if r.remaining() != cells * 4 {
        return Err(r.error(format!(
            "payload holds {} bytes, sidecar shape {:?} promises {}",
            r.remaining(),
            sidecar.shape,
            cells * 4,
        )));
    }
    let mut data = Vec::with_capacity(cells);
    for _ in 0..cells {
        data.push(r.f32("sample")?);
    }
    Ok((sidecar.shape, data))
}

/// Reads a tensor and checks it against an expected shape.
pub fn read_tensor_shaped(path: &Path, expected: &[u32]) -> Result<Vec<f32>> {
    let (shape, data) = read_tensor(path)?;
    if shape != expected {
        return Err(ToolError::Config(format!(
            "tensor {} has shape {:?}, expected {:?}",
            path.display(),
            shape,
            expected,
        )));
    }
    Ok(data)
}
