//! Curation pools as JSON lines, one entry per line, plus the
//! per-sequence summary written as a single JSON document.

use std::path::Path;

use serde::{Deserialize, Serialize};
use teto_core::curation::{CropRect, CurationEntry};

use crate::error::{Result, ToolError};
use crate::formats::{read_bytes, write_bytes, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CropJson {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl From<CropRect> for CropJson {
    fn from(c: CropRect) -> Self {
        Self { x: c.x, y: c.y, width: c.width, height: c.height }
    }
}

impl From<CropJson> for CropRect {
    fn from(c: CropJson) -> Self {
        Self { x: c.x, y: c.y, width: c.width, height: c.height }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolRecord {
    pub sequence: String,
    pub start_frame: u32,
    pub crop: CropJson,
    pub area_ratio: f64,
    pub mask_path: String,
}

impl From<&CurationEntry> for PoolRecord {
    fn from(e: &CurationEntry) -> Self {
        Self {
            sequence: e.sequence.clone(),
            start_frame: e.start_frame,
            crop: e.crop.into(),
            area_ratio: e.area_ratio,
            mask_path: e.mask_path.clone(),
        }
    }
}

impl From<PoolRecord> for CurationEntry {
    fn from(r: PoolRecord) -> Self {
        Self {
            sequence: r.sequence,
            start_frame: r.start_frame,
            crop: r.crop.into(),
            area_ratio: r.area_ratio,
            mask_path: r.mask_path,
        }
    }
}

pub fn write_pool(path: &Path, entries: &[CurationEntry]) -> Result<()> {
    let records: Vec<PoolRecord> = entries.iter().map(Into::into).collect();
    write_jsonl(path, &records)
}

/// Writes one JSON value per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).map_err(|e| ToolError::Config(e.to_string()))?);
        out.push('\n');
    }
    write_bytes(path, out.as_bytes())
}

pub fn read_pool(path: &Path) -> Result<Vec<CurationEntry>> {
    let records: Vec<PoolRecord> = read_jsonl(path)?;
    Ok(records.into_iter().map(Into::into).collect())
}

/// Reads one JSON value per non-empty line.
pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let bytes = read_bytes(path)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| ToolError::parse(path, e.valid_up_to() as u64, "not valid UTF-8"))?;
    let mut records = Vec::new();
    let mut offset = 0u64;
    for line in text.lines() {
        let line_start = offset;
        offset += line.len() as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(line)
            .map_err(|e| ToolError::parse(path, line_start, e.to_string()))?;
        records.push(record);
    }
    Ok(records)
}

/// One sequence's row in the pool summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSummary {
    pub sequence: String,
    pub motion_ratio: f64,
    pub entry_count: usize,
    /// Softmax sampling probability across sequences.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolSummary {
    pub temperature: f64,
    pub min_area_ratio: f64,
    pub accepted: usize,
    pub rejected: usize,
    pub sequences: Vec<SequenceSummary>,
}

pub fn write_summary(path: &Path, summary: &PoolSummary) -> Result<()> {
    write_json(path, summary)
}
