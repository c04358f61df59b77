//! Motion-aware training-pool construction and query-point sampling.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::fmath;
use crate::mask::BinaryMask;
use crate::{Error, Result};

/// Crop rectangle in frame coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CropRect {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

/// One accepted crop of one sequence start.
#[derive(Debug, Clone, PartialEq)]
pub struct CurationEntry {
    pub sequence: String,
    pub start_frame: u32,
    pub crop: CropRect,
    /// Cleaned-mask foreground fraction of the crop.
    pub area_ratio: f64,
    /// Where the cleaned mask was stored, relative to the pool file.
    pub mask_path: String,
}

/// Why a crop was not admitted to the pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    /// The cleaned mask covers less than the required crop fraction.
    LowMaskArea,
}

/// Outcome of judging one candidate crop.
#[derive(Debug, Clone, PartialEq)]
pub enum CropOutcome {
    Accepted(CurationEntry),
    Rejected { area_ratio: f64, reason: RejectReason },
}

impl CropOutcome {
    pub fn accepted(&self) -> Option<&CurationEntry> {
        match self {
            CropOutcome::Accepted(e) => Some(e),
            CropOutcome::Rejected { .. } => None,
        }
    }
}

/// Admits a crop when the cleaned object-motion mask covers at least
/// `min_area_ratio` of it (inclusive). Rejection is a normal outcome.
pub fn curate_crop(
    sequence: &str,
    start_frame: u32,
    crop: CropRect,
    cleaned_mask: &BinaryMask,
    mask_path: &str,
    min_area_ratio: f64,
) -> CropOutcome {
    debug_assert_eq!((cleaned_mask.width(), cleaned_mask.height()), (crop.width, crop.height));
    let area_ratio = cleaned_mask.area_ratio();
    if area_ratio >= min_area_ratio {
        CropOutcome::Accepted(CurationEntry {
            sequence: sequence.into(),
            start_frame,
            crop,
            area_ratio,
            mask_path: mask_path.into(),
        })
    } else {
        CropOutcome::Rejected { area_ratio, reason: RejectReason::LowMaskArea }
    }
}

/// Per-sequence curation summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceStats {
    pub sequence: String,
    /// Fraction of start indices with at least one accepted crop.
    pub motion_ratio: f64,
    pub entry_count: usize,
}

/// Cap on accepted crops a single start index may contribute.
pub const MAX_ENTRIES_PER_START: usize = 3;

/// Flattens per-start accepted entries into the sequence pool,
/// keeping at most [`MAX_ENTRIES_PER_START`] per start and preserving
/// the given (start, crop) order.
pub fn build_pool(
    sequence: &str,
    starts: &[(u32, Vec<CurationEntry>)],
) -> (Vec<CurationEntry>, SequenceStats) {
    let mut pool = Vec::new();
    let mut active_starts = 0usize;
    for (_, accepted) in starts {
        if !accepted.is_empty() {
            active_starts += 1;
        }
        pool.extend(accepted.iter().take(MAX_ENTRIES_PER_START).cloned());
    }
    let motion_ratio =
        if starts.is_empty() { 0.0 } else { active_starts as f64 / starts.len() as f64 };
    let stats = SequenceStats { sequence: sequence.into(), motion_ratio, entry_count: pool.len() };
    (pool, stats)
}

/// Softmax over motion ratios: `p_i = exp(r_i / T) / sum_j exp(r_j / T)`,
/// computed max-subtracted.
pub fn sequence_weights(stats: &[SequenceStats], temperature: f64) -> Result<Vec<f64>> {
    if stats.is_empty() {
        return Err(Error::InsufficientSupport { found: 0, needed: 1 });
    }
    if !(temperature > 0.0) {
        return Err(Error::InvalidConfig("temperature must be positive"));
    }
    if stats.iter().any(|s| !s.motion_ratio.is_finite()) {
        return Err(Error::NonFinite { what: "motion_ratio" });
    }
    let max = stats.iter().map(|s| s.motion_ratio).fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> =
        stats.iter().map(|s| fmath::exp((s.motion_ratio - max) / temperature)).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// How a query point was drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Uniform over the object-mask pixels.
    Object,
    /// Uniform over the whole crop.
    Uniform,
}

/// One query point in absolute frame coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryPoint {
    pub x: u32,
    pub y: u32,
    pub t_us: i64,
    pub provenance: Provenance,
}

/// Query points plus a flag recording the empty-mask fallback.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuerySet {
    pub points: Vec<QueryPoint>,
    /// True when an empty mask forced all-uniform sampling.
    pub fallback_uniform: bool,
}

/// Draws `floor(object_fraction * n_q)` points uniformly from mask
/// pixels (without replacement while the mask is large enough) and the
/// rest uniformly from the whole crop, in that order, so a fixed
/// generator reproduces the set bit for bit. An empty mask falls back
/// to all-uniform sampling and sets the flag.
///
/// The mask must be crop-sized; returned coordinates are absolute
/// (crop origin plus in-crop position).
pub fn sample_queries<R: Rng>(
    mask: &BinaryMask,
    crop: CropRect,
    n_q: usize,
    object_fraction: f64,
    t_query_us: i64,
    rng: &mut R,
) -> Result<QuerySet> {
    if n_q == 0 {
        return Err(Error::InvalidConfig("n_q must be at least 1"));
    }
    if !(0.0..=1.0).contains(&object_fraction) {
        return Err(Error::OutOfRange { what: "object_fraction" });
    }
    if (mask.width(), mask.height()) != (crop.width, crop.height) {
        return Err(Error::ShapeMismatch {
            expected_width: crop.width,
            expected_height: crop.height,
            actual_width: mask.width(),
            actual_height: mask.height(),
        });
    }
    if crop.width == 0 || crop.height == 0 {
        return Err(Error::InvalidConfig("crop must be non-empty"));
    }

    let mut mask_pixels: Vec<usize> =
        (0..mask.bits().len()).filter(|&i| mask.bits()[i]).collect();
    let n_obj = fmath::floor(object_fraction * n_q as f64) as usize;
    let fallback_uniform = n_obj > 0 && mask_pixels.is_empty();

    let mut points = Vec::with_capacity(n_q);
    let push = |idx: usize, provenance: Provenance, points: &mut Vec<QueryPoint>| {
        points.push(QueryPoint {
            x: crop.x + (idx % mask.width() as usize) as u32,
            y: crop.y + (idx / mask.width() as usize) as u32,
            t_us: t_query_us,
            provenance,
        });
    };

    if !fallback_uniform && n_obj > 0 {
        if mask_pixels.len() >= n_obj {
            for i in 0..n_obj {
                let j = rng.random_range(i..mask_pixels.len());
                mask_pixels.swap(i, j);
                push(mask_pixels[i], Provenance::Object, &mut points);
            }
        } else {
            for _ in 0..n_obj {
                let j = rng.random_range(0..mask_pixels.len());
                push(mask_pixels[j], Provenance::Object, &mut points);
            }
        }
    }
    while points.len() < n_q {
        let x = rng.random_range(0..crop.width);
        let y = rng.random_range(0..crop.height);
        points.push(QueryPoint {
            x: crop.x + x,
            y: crop.y + y,
            t_us: t_query_us,
            provenance: Provenance::Uniform,
        });
    }
    Ok(QuerySet { points, fallback_uniform })
}
