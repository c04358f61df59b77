//! Trajectory files in the TETOTRK1 layout: magic, u32 query count,
//! u32 frame count, then per query a u32 query frame followed by
//! frame-major `(f32 x, f32 y, f32 visibility)` triples.

use std::path::Path;

use teto_core::oats::TrajectorySet;

use crate::error::Result;
use crate::formats::{read_bytes, write_bytes, ByteReader};

pub const TRACK_MAGIC: &[u8; 8] = b"TETOTRK1";

pub fn write_tracks(path: &Path, traj: &TrajectorySet) -> Result<()> {
    let (queries, frames) = (traj.queries(), traj.frames());
    let mut out = Vec::with_capacity(16 + queries * (4 + frames * 12));
    out.extend_from_slice(TRACK_MAGIC);
    out.extend_from_slice(&(queries as u32).to_le_bytes());
    out.extend_from_slice(&(frames as u32).to_le_bytes());
    for q in 0..queries {
        out.extend_from_slice(&traj.query_frame(q).to_le_bytes());
        for t in 0..frames {
            let [x, y] = traj.position(q, t);
            out.extend_from_slice(&x.to_le_bytes());
            out.extend_from_slice(&y.to_le_bytes());
            out.extend_from_slice(&traj.visibility(q, t).to_le_bytes());
        }
    }
    write_bytes(path, &out)
}

pub fn read_tracks(path: &Path) -> Result<TrajectorySet> {
    let bytes = read_bytes(path)?;
    let mut r = ByteReader::new(path, &bytes);
    r.magic(TRACK_MAGIC)?;
    let queries = r.u32("query count")? as usize;
    let frames = r.u32("frame count")? as usize;
    let expected = queries * (4 + frames * 12);
    if r.remaining() != expected {
        return Err(r.error(format!(
            "payload holds {} bytes, header promises {expected}",
            r.remaining(),
        )));
    }
    let mut positions = Vec::with_capacity(queries * frames);
    let mut visibility = Vec::with_capacity(queries * frames);
    let mut query_frames = Vec::with_capacity(queries);
    for _ in 0..queries {
        query_frames.push(r.u32("query frame")?);
        for _ in 0..frames {
            let x = r.f32("x")?;
            let y = r.f32("y")?;
            positions.push([x, y]);
            visibility.push(r.f32("visibility")?);
        }
    }
    Ok(TrajectorySet::new(queries, frames, positions, visibility, query_frames, None)?)
}
