//! Exported event stacks: a raw float32 payload in channel-last
//! order, `[((y * width + x) * B) + b]`, plus a JSON sidecar with the
//! shape and realized bin counts.

use std::path::Path;

use serde::{Deserialize, Serialize};
use teto_core::event::EventStack;

use crate::error::Result;
use crate::formats::{read_bytes, read_json, write_bytes, write_json, ByteReader};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackSidecar {
    pub width: u32,
    pub height: u32,
    #[serde(rename = "B")]
    pub bins: u32,
    pub t_ref: i64,
    pub counts: Vec<u64>,
}

pub fn write_stack(bin_path: &Path, json_path: &Path, stack: &EventStack) -> Result<()> {
    let (width, height, bins) = (stack.width(), stack.height(), stack.bins());
    let mut payload = Vec::with_capacity((width * height * bins) as usize * 4);
    for y in 0..height {
        for x in 0..width {
            for b in 0..bins {
                payload.extend_from_slice(&(stack.value(x, y, b) as f32).to_le_bytes());
            }
        }
    }
    write_bytes(bin_path, &payload)?;
    write_json(
        json_path,
        &StackSidecar {
            width,
            height,
            bins,
            t_ref: stack.t_ref_us(),
            counts: stack.counts().to_vec(),
        },
    )
}

pub fn read_stack(bin_path: &Path, json_path: &Path) -> Result<(StackSidecar, Vec<f32>)> {
    let sidecar: StackSidecar = read_json(json_path)?;
    let bytes = read_bytes(bin_path)?;
    let mut r = ByteReader::new(bin_path, &bytes);
    let cells = sidecar.width as usize * sidecar.height as usize * sidecar.bins as usize;
    if r.remaining() != cells * 4 {
        return Err(r.error(format!(
            "payload holds {} bytes, sidecar promises {}",
            r.remaining(),
            cells * 4,
        )));
    }
    let mut data = Vec::with_capacity(cells);
    for _ in 0..cells {
        data.push(r.f32("sample")?);
    }
    Ok((sidecar, data))
}
