//! Supervision losses, soft-argmax correspondence, and latent warping
//! arithmetic for distillation and frame interpolation.

use alloc::vec::Vec;

use crate::flow::FlowField;
use crate::{Error, Result};

/// Down-weight applied to occluded or uncertain points.
pub const OCCLUDED_WEIGHT: f64 = 0.2;

/// Weights and cuts shared by the loss terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    /// Refinement iterations the predictor emits (K).
    pub refinement_iterations: usize,
    /// Per-iteration decay; iteration k is weighted `gamma^(K-k)`.
    pub gamma: f64,
    /// Weight of the trajectory term.
    pub alpha: f64,
    /// Weight of the flow term inside the total loss.
    pub lambda: f64,
    /// Teacher visibility at or above this counts as visible.
    pub visibility_cut: f32,
    /// Teacher confidence at or above this counts as certain.
    pub confidence_cut: f32,
    /// Quadratic-to-linear transition of the attention Huber loss.
    pub huber_delta: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            refinement_iterations: 4,
            gamma: 0.8,
            alpha: 1.0,
            lambda: 0.01,
            visibility_cut: 0.5,
            confidence_cut: 0.3,
            huber_delta: 1.0,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if self.refinement_iterations == 0 {
            return Err(Error::InvalidConfig("refinement_iterations must be at least 1"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidConfig("gamma must be in (0, 1]"));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidConfig("lambda must be non-negative"));
        }
        if !(self.huber_delta > 0.0) {
            return Err(Error::InvalidConfig("huber_delta must be positive"));
        }
        Ok(())
    }
}

/// Dense per-query per-frame point grid, the common shape of one
/// refinement iteration's output and of the pseudo-labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackPoints {
    queries: usize,
    frames: usize,
    /// `[query * frames + frame]`.
    points: Vec<[f32; 2]>,
}

impl TrackPoints {
    pub fn new(queries: usize, frames: usize, points: Vec<[f32; 2]>) -> Result<Self> {
        let expected = queries * frames;
        if points.len() != expected {
            return Err(Error::LengthMismatch { expected, actual: points.len() });
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "track points" });
        }
        Ok(Self { queries, frames, points })
    }

    pub fn queries(&self) -> usize {
        self.queries
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn point(&self, query: usize, frame: usize) -> [f32; 2] {
        self.points[query * self.frames + frame]
    }

    pub fn points(&self) -> &[[f32; 2]] {
        &self.points
    }
}

fn geometric_weight(gamma: f64, exponent: usize) -> f64 {
    let mut w = 1.0;
    for _ in 0..exponent {
        w *= gamma;
    }
    w
}

fn check_plane(plane: &[f32], expected: usize, what: &'static str) -> Result<()> {
    if plane.len() != expected {
        return Err(Error::LengthMismatch { expected, actual: plane.len() });
    }
    if plane.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what });
    }
    Ok(())
}

/// Iteration-decayed trajectory supervision.
///
/// Each iteration contributes the mean over (query, frame) of the
/// per-coordinate L1 distance to the pseudo-label, weighted 1 where
/// the teacher is visible and confident and [`OCCLUDED_WEIGHT`]
/// elsewhere; iteration k carries `gamma^(K-k)` and the sum is scaled
/// by `alpha`.
pub fn track_loss(
    preds: &[TrackPoints],
    pseudo: &TrackPoints,
    visibility: &[f32],
    confidence: &[f32],
    cfg: &LossConfig,
) -> Result<f64> {
    cfg.validate()?;
    if preds.len() != cfg.refinement_iterations {
        return Err(Error::InvalidConfig("prediction count must equal refinement_iterations"));
    }
    let cells = pseudo.queries * pseudo.frames;
    if cells == 0 {
        return Err(Error::InvalidConfig("pseudo-labels are empty"));
    }
    check_plane(visibility, cells, "visibility")?;
    check_plane(confidence, cells, "confidence")?;
    for p in preds {
        if (p.queries, p.frames) != (pseudo.queries, pseudo.frames) {
            return Err(Error::LengthMismatch { expected: cells, actual: p.queries * p.frames });
        }
    }

    let k_total = preds.len();
    let mut loss = 0.0;
    for (k_index, pred) in preds.iter().enumerate() {
        let mut sum = 0.0;
        for i in 0..cells {
            let supervised = visibility[i] >= cfg.visibility_cut && confidence[i] >= cfg.confidence_cut;
            let w = if supervised { 1.0 } else { OCCLUDED_WEIGHT };
            let [px, py] = pred.points[i];
            let [tx, ty] = pseudo.points[i];
            sum += w * ((f64::from(px) - f64::from(tx)).abs() + (f64::from(py) - f64::from(ty)).abs());
        }
        loss += geometric_weight(cfg.gamma, k_total - (k_index + 1)) * (sum / cells as f64);
    }
    Ok(cfg.alpha * loss)
}

/// Iteration-decayed dense flow supervision: mean pixelwise
/// per-component L1 to the pseudo flow, weighted `gamma^(K-k)`.
pub fn flow_loss(preds: &[FlowField], pseudo: &FlowField, cfg: &LossConfig) -> Result<f64> {
    cfg.validate()?;
    if preds.len() != cfg.refinement_iterations {
        return Err(Error::InvalidConfig("prediction count must equal refinement_iterations"));
    }
    let cells = pseudo.u().len();
    if cells == 0 {
        return Err(Error::InvalidConfig("pseudo flow is empty"));
    }

    let k_total = preds.len();
    let mut loss = 0.0;
    for (k_index, pred) in preds.iter().enumerate() {
        if (pred.width(), pred.height()) != (pseudo.width(), pseudo.height()) {
            return Err(Error::ShapeMismatch {
                expected_width: pseudo.width(),
                expected_height: pseudo.height(),
                actual_width: pred.width(),
                actual_height: pred.height(),
            });
        }
        let mut sum = 0.0;
        for i in 0..cells {
            sum += (f64::from(pred.u()[i]) - f64::from(pseudo.u()[i])).abs()
                + (f64::from(pred.v()[i]) - f64::from(pseudo.v()[i])).abs();
        }
        loss += geometric_weight(cfg.gamma, k_total - (k_index + 1)) * (sum / cells as f64);
    }
    Ok(loss)
}

/// Combined supervision `track + lambda * flow`.
pub fn total_loss(track: f64, flow: f64, lambda: f64) -> f64 {
    track + lambda * flow
}

/// Expectation of grid position under the re-normalized weights of one
/// attention row laid out row-major over a `grid_width * grid_height`
/// position grid.
pub fn soft_argmax(row: &[f32], grid_width: u32, grid_height: u32) -> Result<(f64, f64)> {
    let expected = grid_width as usize * grid_height as usize;
    if row.len() != expected {
        return Err(Error::LengthMismatch { expected, actual: row.len() });
    }
    if row.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "attention row" });
    }
    if row.iter().any(|&v| v < 0.0) {
        return Err(Error::OutOfRange { what: "attention row" });
    }
    let total: f64 = row.iter().map(|&v| f64::from(v)).sum();
    if total <= 0.0 {
        return Err(Error::EmptyAttentionRow);
    }
    let (mut x, mut y) = (0.0, 0.0);
    for (i, &w) in row.iter().enumerate() {
        let p = f64::from(w) / total;
        x += p * (i % grid_width as usize) as f64;
        y += p * (i / grid_width as usize) as f64;
    }
    Ok((x, y))
}

/// Huber penalty: quadratic `z^2 / 2` within `delta` of zero, linear
/// `delta * (|z| - delta/2)` outside.
pub fn huber(z: f64, delta: f64) -> f64 {
    let a = z.abs();
    if a <= delta { 0.5 * z * z } else { delta * (a - 0.5 * delta) }
}

/// Trajectory-guided attention supervision for one query and one
/// direction: the mean over visible non-query frames of the Huber
/// penalty summed per coordinate.
pub fn attention_traj_loss(
    predicted: &[[f32; 2]],
    target: &[[f32; 2]],
    visibility: &[f32],
    query_frame: usize,
    huber_delta: f64,
) -> Result<f64> {
    if predicted.len() != target.len() || visibility.len() != target.len() {
        return Err(Error::LengthMismatch { expected: target.len(), actual: predicted.len().min(visibility.len()) });
    }
    if !(huber_delta > 0.0) {
        return Err(Error::InvalidConfig("huber_delta must be positive"));
    }
    for series in [predicted, target] {
        if series.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "positions" });
        }
    }
    if visibility.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "visibility" });
    }

    let mut sum = 0.0;
    let mut count = 0usize;
    for t in 0..target.len() {
        if t == query_frame || visibility[t] < 0.5 {
            continue;
        }
        let dx = f64::from(predicted[t][0]) - f64::from(target[t][0]);
        let dy = f64::from(predicted[t][1]) - f64::from(target[t][1]);
        sum += huber(dx, huber_delta) + huber(dy, huber_delta);
        count += 1;
    }
    if count == 0 {
        return Err(Error::NoVisibleFrames);
    }
    Ok(sum / count as f64)
}

/// Mean of the forward- and backward-direction attention losses.
pub fn average_bidirectional(forward: f64, backward: f64) -> f64 {
    0.5 * (forward + backward)
}

/// Row-major multi-channel float image (index `(y * width + x) * channels + c`).
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: u32,
    height: u32,
    channels: u32,
    data: Vec<f32>,
}

impl Image {
    pub fn new(width: u32, height: u32, channels: u32, data: Vec<f32>) -> Result<Self> {
        let expected = width as usize * height as usize * channels as usize;
        if data.len() != expected {
            return Err(Error::LengthMismatch { expected, actual: data.len() });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "image" });
        }
        Ok(Self { width, height, channels, data })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u32 {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    fn texel(&self, x: u32, y: u32, c: u32) -> f32 {
        self.data[(y as usize * self.width as usize + x as usize) * self.channels as usize + c as usize]
    }
}

/// Samples the image at `position + flow(position)` with bilinear
/// interpolation; coordinates beyond the frame replicate the edge.
/// Samples landing exactly on a pixel copy it bitwise, so zero flow is
/// the exact identity.
pub fn backward_warp(image: &Image, flow: &FlowField) -> Result<Image> {
    if (flow.width(), flow.height()) != (image.width, image.height) {
        return Err(Error::ShapeMismatch {
            expected_width: image.width,
            expected_height: image.height,
            actual_width: flow.width(),
            actual_height: flow.height(),
        });
    }
    let mut out = image.clone();
    for y in 0..image.height {
        for x in 0..image.width {
            let (u, v) = flow.at(x, y);
            let sx = (f64::from(x) + f64::from(u)).clamp(0.0, f64::from(image.width - 1));
            let sy = (f64::from(y) + f64::from(v)).clamp(0.0, f64::from(image.height - 1));
            let x0 = sx as u32;
            let y0 = sy as u32;
            let fx = sx - f64::from(x0);
            let fy = sy - f64::from(y0);
            let base = (y as usize * image.width as usize + x as usize) * image.channels as usize;
            if fx == 0.0 && fy == 0.0 {
                for c in 0..image.channels {
                    out.data[base + c as usize] = image.texel(x0, y0, c);
                }
                continue;
            }
            let x1 = (x0 + 1).min(image.width - 1);
            let y1 = (y0 + 1).min(image.height - 1);
            for c in 0..image.channels {
                let top = f64::from(image.texel(x0, y0, c)) * (1.0 - fx)
                    + f64::from(image.texel(x1, y0, c)) * fx;
                let bottom = f64::from(image.texel(x0, y1, c)) * (1.0 - fx)
                    + f64::from(image.texel(x1, y1, c)) * fx;
                out.data[base + c as usize] = (top * (1.0 - fy) + bottom * fy) as f32;
            }
        }
    }
    Ok(out)
}

/// Temporal blend `(1 - t_norm) * z0 + t_norm * z1`; the endpoints
/// return the corresponding input exactly.
pub fn blend_bidirectional(z0: &Image, z1: &Image, t_norm: f64) -> Result<Image> {
    if (z0.width, z0.height, z0.channels) != (z1.width, z1.height, z1.channels) {
        return Err(Error::ShapeMismatch {
            expected_width: z0.width,
            expected_height: z0.height,
            actual_width: z1.width,
            actual_height: z1.height,
        });
    }
    if !(0.0..=1.0).contains(&t_norm) {
        return Err(Error::OutOfRange { what: "t_norm" });
    }
    if t_norm == 0.0 {
        return Ok(z0.clone());
    }
    if t_norm == 1.0 {
        return Ok(z1.clone());
    }
    let mut out = z0.clone();
    for (o, (&a, &b)) in out.data.iter_mut().zip(z0.data.iter().zip(&z1.data)) {
        *o = ((1.0 - t_norm) * f64::from(a) + t_norm * f64::from(b)) as f32;
    }
    Ok(out)
}
