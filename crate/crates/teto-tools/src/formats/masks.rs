//! Multi-object mask sequences: a JSON manifest mapping frame index
//! to `{object id -> PGM path}`, with paths relative to the manifest.

use std::collections::BTreeMap;
use std::path::Path;

use teto_core::mask::BinaryMask;
use teto_core::oats::ObjectMaskSequence;

use crate::error::{Result, ToolError};
use crate::formats::pgm::read_pgm;
use crate::formats::{read_json, write_json};

pub type MaskManifest = BTreeMap<u32, BTreeMap<u32, String>>;

pub fn write_manifest(path: &Path, manifest: &MaskManifest) -> Result<()> {
    write_json(path, manifest)
}

pub fn read_manifest(path: &Path) -> Result<MaskManifest> {
    read_json(path)
}

/// Loads every referenced mask. Frames absent from the manifest stay
/// empty; the sequence length is one past the largest frame index.
pub fn load_mask_sequence(manifest_path: &Path) -> Result<ObjectMaskSequence> {
    let manifest = read_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let frames = manifest.keys().next_back().map_or(0, |&last| last as usize + 1);
    let mut sequence: Vec<BTreeMap<u32, BinaryMask>> = vec![BTreeMap::new(); frames];
    for (&frame, objects) in &manifest {
        let slot = &mut sequence[frame as usize];
        for (&id, rel_path) in objects {
            let mask = read_pgm(&base.join(rel_path))?;
            if let Some(prev) = slot.values().next() {
                if (mask.width(), mask.height()) != (prev.width(), prev.height()) {
                    return Err(ToolError::Config(format!(
                        "mask {rel_path} is {}x{}, frame {frame} started as {}x{}",
                        mask.width(),
                        mask.height(),
                        prev.width(),
                        prev.height(),
                    )));
                }
            }
            slot.insert(id, mask);
        }
    }
    Ok(ObjectMaskSequence::new(sequence))
}
