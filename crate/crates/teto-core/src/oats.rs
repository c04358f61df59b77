//! Object-adherent trajectory scoring: how consistently tracked
//! points stay on the object they started on.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::fmath;
use crate::mask::{BinaryMask, Kernel};
use crate::{Error, Result};

/// Distance thresholds evaluated by [`oats_suite`].
pub const DELTAS: [u32; 6] = [0, 1, 2, 4, 8, 16];

/// Soft visibilities at or above this count as visible.
pub const VISIBILITY_CUT: f32 = 0.5;

/// Per-query per-frame tracked positions with visibility.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    queries: usize,
    frames: usize,
    /// `[query * frames + frame]`, (x, y) in float pixels.
    positions: Vec<[f32; 2]>,
    /// Same indexing, in `[0, 1]`.
    visibility: Vec<f32>,
    /// Frame each query was issued at.
    query_frames: Vec<u32>,
    confidence: Option<Vec<f32>>,
}

impl TrajectorySet {
    pub fn new(
        queries: usize,
        frames: usize,
        positions: Vec<[f32; 2]>,
        visibility: Vec<f32>,
        query_frames: Vec<u32>,
        confidence: Option<Vec<f32>>,
    ) -> Result<Self> {
        let expected = queries * frames;
        for len in [positions.len(), visibility.len(), confidence.as_ref().map_or(expected, Vec::len)] {
            if len != expected {
                return Err(Error::LengthMismatch { expected, actual: len });
            }
        }
        if query_frames.len() != queries {
            return Err(Error::LengthMismatch { expected: queries, actual: query_frames.len() });
        }
        if positions.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "positions" });
        }
        for (plane, what) in [(Some(&visibility), "visibility"), (confidence.as_ref(), "confidence")] {
            if let Some(p) = plane {
                if p.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite { what });
                }
                if p.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                    return Err(Error::OutOfRange { what });
                }
            }
        }
        if query_frames.iter().any(|&f| f as usize >= frames) {
            return Err(Error::InvalidConfig("query frame beyond trajectory length"));
        }
        Ok(Self { queries, frames, positions, visibility, query_frames, confidence })
    }

    pub fn queries(&self) -> usize {
        self.queries
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn position(&self, query: usize, frame: usize) -> [f32; 2] {
        self.positions[query * self.frames + frame]
    }

    pub fn visibility(&self, query: usize, frame: usize) -> f32 {
        self.visibility[query * self.frames + frame]
    }

    pub fn query_frame(&self, query: usize) -> u32 {
        self.query_frames[query]
    }

    pub fn confidence(&self, query: usize, frame: usize) -> Option<f32> {
        self.confidence.as_ref().map(|c| c[query * self.frames + frame])
    }

    /// Frames where the query is visible, its own query frame excluded.
    pub fn visible_frames(&self, query: usize) -> impl Iterator<Item = usize> + '_ {
        let qf = self.query_frame(query) as usize;
        (0..self.frames)
            .filter(move |&t| t != qf && self.visibility(query, t) >= VISIBILITY_CUT)
    }
}

/// Per-frame object masks keyed by object id.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectMaskSequence {
    frames: Vec<BTreeMap<u32, BinaryMask>>,
}

impl ObjectMaskSequence {
    pub fn new(frames: Vec<BTreeMap<u32, BinaryMask>>) -> Self {
        Self { frames }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame(&self, t: usize) -> Option<&BTreeMap<u32, BinaryMask>> {
        self.frames.get(t)
    }
}

/// Rounds a float position half away from zero and keeps it only when
/// the resulting pixel is inside the frame.
pub fn rasterize(x: f32, y: f32, width: u32, height: u32) -> Option<(u32, u32)> {
    let xi = fmath::roundf(x) as i64;
    let yi = fmath::roundf(y) as i64;
    (xi >= 0 && yi >= 0 && xi < i64::from(width) && yi < i64::from(height))
        .then(|| (xi as u32, yi as u32))
}

/// Euclidean dilation by `delta`; radius zero is the identity.
pub fn dilate_mask(mask: &BinaryMask, delta: u32) -> BinaryMask {
    mask.dilate(&Kernel::disk(delta))
}

/// Query-to-object assignment from first-frame containment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryAssignment {
    /// Object id per query, `None` when not evaluable.
    pub object_of: Vec<Option<u32>>,
}

impl QueryAssignment {
    pub fn evaluable(&self) -> usize {
        self.object_of.iter().filter(|o| o.is_some()).count()
    }
}

/// Assigns each query to the object whose first-frame mask contains
/// its rounded start position, requiring the position to also lie in
/// the event motion mask. Overlapping objects resolve to the smallest
/// area, then the smaller id. Queries matching nothing are excluded;
/// zero evaluable queries is an error.
pub fn assign_queries(
    traj: &TrajectorySet,
    first_frame_masks: &BTreeMap<u32, BinaryMask>,
    event_mask: &BinaryMask,
) -> Result<QueryAssignment> {
    let mut object_of = Vec::with_capacity(traj.queries());
    for q in 0..traj.queries() {
        let [x, y] = traj.position(q, traj.query_frame(q) as usize);
        let assigned = rasterize(x, y, event_mask.width(), event_mask.height())
            .filter(|&(px, py)| event_mask.get(px, py))
            .and_then(|(px, py)| {
                first_frame_masks
                    .iter()
                    .filter(|(_, mask)| {
                        mask.width() == event_mask.width()
                            && mask.height() == event_mask.height()
                            && mask.get(px, py)
                    })
                    .map(|(&id, mask)| (mask.count_ones(), id))
                    .min()
                    .map(|(_, id)| id)
            });
        object_of.push(assigned);
    }
    let assignment = QueryAssignment { object_of };
    if assignment.evaluable() == 0 {
        return Err(Error::NoEvaluableQueries);
    }
    Ok(assignment)
}

/// Score of one threshold plus the query bookkeeping behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaScore {
    pub delta: u32,
    /// Mean over queries of the per-query adherent-frame fraction.
    pub score: f64,
    /// Queries that entered the mean.
    pub evaluated_queries: usize,
    /// Assigned queries dropped for having no visible frames.
    pub excluded_queries: usize,
}

/// Fraction of visible frames whose rounded prediction lies within
/// `delta` of the assigned object, averaged per query first.
/// Out-of-frame predictions and frames missing the object's mask are
/// non-adherent. Queries visible nowhere are excluded from the mean.
pub fn oats_delta(
    traj: &TrajectorySet,
    masks: &ObjectMaskSequence,
    assignment: &QueryAssignment,
    delta: u32,
) -> Result<DeltaScore> {
    if assignment.object_of.len() != traj.queries() {
        return Err(Error::LengthMismatch {
            expected: traj.queries(),
            actual: assignment.object_of.len(),
        });
    }
    let mut dilated: BTreeMap<(usize, u32), Option<BinaryMask>> = BTreeMap::new();

    let mut sum = 0.0;
    let mut evaluated_queries = 0usize;
    let mut excluded_queries = 0usize;
    for q in 0..traj.queries() {
        let Some(object) = assignment.object_of[q] else { continue };
        let mut visible = 0usize;
        let mut adherent = 0usize;
        for t in traj.visible_frames(q) {
            visible += 1;
            let mask = dilated
                .entry((t, object))
                .or_insert_with(|| {
                    masks.frame(t).and_then(|f| f.get(&object)).map(|m| dilate_mask(m, delta))
                })
                .as_ref();
            let Some(mask) = mask else { continue };
            let [x, y] = traj.position(q, t);
            if let Some((px, py)) = rasterize(x, y, mask.width(), mask.height()) {
                if mask.get(px, py) {
                    adherent += 1;
                }
            }
        }
        if visible == 0 {
            excluded_queries += 1;
            continue;
        }
        sum += adherent as f64 / visible as f64;
        evaluated_queries += 1;
    }
    if evaluated_queries == 0 {
        return Err(Error::NoEvaluableQueries);
    }
    Ok(DeltaScore { delta, score: sum / evaluated_queries as f64, evaluated_queries, excluded_queries })
}

/// Scores across all thresholds plus their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct OatsReport {
    /// One score per entry of [`DELTAS`], in order.
    pub per_delta: [DeltaScore; 6],
    /// Arithmetic mean of the six per-threshold scores.
    pub average: f64,
    pub total_queries: usize,
    pub evaluated_queries: usize,
    pub excluded_queries: usize,
}

/// Mean of the six per-threshold scores.
pub fn average_of(scores: &[f64; 6]) -> f64 {
    scores.iter().sum::<f64>() / 6.0
}

/// Full evaluation: first-frame assignment against the event mask,
/// then one score per threshold in [`DELTAS`] and their mean.
pub fn oats_suite(
    traj: &TrajectorySet,
    masks: &ObjectMaskSequence,
    event_mask: &BinaryMask,
) -> Result<OatsReport> {
    let first = masks.frame(0).ok_or(Error::InvalidConfig("mask sequence is empty"))?;
    let assignment = assign_queries(traj, first, event_mask)?;
    let per_delta = DELTAS.map(|d| oats_delta(traj, masks, &assignment, d));
    let mut scores = [DeltaScore { delta: 0, score: 0.0, evaluated_queries: 0, excluded_queries: 0 }; 6];
    for (slot, result) in scores.iter_mut().zip(per_delta) {
        *slot = result?;
    }
    let average = average_of(&scores.map(|s| s.score));
    Ok(OatsReport {
        per_delta: scores,
        average,
        total_queries: traj.queries(),
        evaluated_queries: scores[0].evaluated_queries,
        excluded_queries: scores[0].excluded_queries,
    })
}
