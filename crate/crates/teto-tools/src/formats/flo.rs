//! Middlebury `.flo` optical-flow files: float tag 202021.25, i32
//! width, i32 height, then row-major interleaved (u, v) float32.

use std::path::Path;

use teto_core::flow::FlowField;

use crate::error::Result;
use crate::formats::{read_bytes, write_bytes, ByteReader};

pub const FLO_TAG: f32 = 202021.25;

pub fn write_flo(path: &Path, flow: &FlowField) -> Result<()> {
    let cells = flow.u().len();
    let mut out = Vec::with_capacity(12 + cells * 8);
    out.extend_from_slice(&FLO_TAG.to_le_bytes());
    out.extend_from_slice(&(flow.width() as i32).to_le_bytes());
    out.extend_from_slice(&(flow.height() as i32).to_le_bytes());
    for i in 0..cells {
        out.extend_from_slice(&flow.u()[i].to_le_bytes());
        out.extend_from_slice(&flow.v()[i].to_le_bytes());
    }
    write_bytes(path, &out)
}

pub fn read_flo(path: &Path) -> Result<FlowField> {
    let bytes = read_bytes(path)?;
    let mut r = ByteReader::new(path, &bytes);
    let tag = r.f32("tag")?;
    if tag.to_bits() != FLO_TAG.to_bits() {
        return Err(r.error(format!("bad flow tag {tag}, expected {FLO_TAG}")));
    }
    let width = r.i32("width")?;
    let height = r.i32("height")?;
    if width <= 0 || height <= 0 {
        return Err(r.error(format!("non-positive dimensions {width}x{height}")));
    }
    let cells = width as usize * height as usize;
    if r.remaining() != cells * 8 {
        return Err(r.error(format!(
            "payload holds {} bytes, dimensions promise {}",
            r.remaining(),
            cells * 8,
        )));
    }
    let mut u = Vec::with_capacity(cells);
    let mut v = Vec::with_capacity(cells);
    for _ in 0..cells {
        u.push(r.f32("u")?);
        v.push(r.f32("v")?);
    }
    Ok(FlowField::new(width as u32, height as u32, u, v, None, None)?)
}
