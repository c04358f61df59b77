//! Decomposition of a dense flow field into a global affine motion
//! model and a residual object-motion mask.

use alloc::vec::Vec;

use rand::Rng;

use crate::fmath;
use crate::grid::Grid;
use crate::mask::{BinaryMask, Kernel};
use crate::stats;
use crate::{Error, Result};

/// Dense per-pixel displacement with optional visibility and
/// confidence planes. Absent planes behave as all-ones.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    width: u32,
    height: u32,
    u: Vec<f32>,
    v: Vec<f32>,
    visibility: Option<Vec<f32>>,
    confidence: Option<Vec<f32>>,
}

impl FlowField {
    pub fn new(
        width: u32,
        height: u32,
        u: Vec<f32>,
        v: Vec<f32>,
        visibility: Option<Vec<f32>>,
        confidence: Option<Vec<f32>>,
    ) -> Result<Self> {
        let expected = width as usize * height as usize;
        for plane in [Some(&u), Some(&v), visibility.as_ref(), confidence.as_ref()].into_iter().flatten() {
            if plane.len() != expected {
                return Err(Error::LengthMismatch { expected, actual: plane.len() });
            }
        }
        if u.iter().chain(&v).any(|val| !val.is_finite()) {
            return Err(Error::NonFinite { what: "flow" });
        }
        for (plane, what) in [(&visibility, "visibility"), (&confidence, "confidence")] {
            if let Some(p) = plane {
                if p.iter().any(|val| !val.is_finite()) {
                    return Err(Error::NonFinite { what });
                }
                if p.iter().any(|&val| !(0.0..=1.0).contains(&val)) {
                    return Err(Error::OutOfRange { what });
                }
            }
        }
        Ok(Self { width, height, u, v, visibility, confidence })
    }

    /// A field with uniform flow everywhere and no auxiliary planes.
    pub fn uniform(width: u32, height: u32, u: f32, v: f32) -> Self {
        let len = width as usize * height as usize;
        Self {
            width,
            height,
            u: alloc::vec![u; len],
            v: alloc::vec![v; len],
            visibility: None,
            confidence: None,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn u(&self) -> &[f32] {
        &self.u
    }

    pub fn v(&self) -> &[f32] {
        &self.v
    }

    pub fn visibility(&self) -> Option<&[f32]> {
        self.visibility.as_deref()
    }

    pub fn confidence(&self) -> Option<&[f32]> {
        self.confidence.as_deref()
    }

    #[inline]
    fn idx(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    /// Flow vector at a pixel.
    pub fn at(&self, x: u32, y: u32) -> (f32, f32) {
        let i = self.idx(x, y);
        (self.u[i], self.v[i])
    }

    /// Visibility plane as a grid, all-ones when absent.
    pub fn visibility_grid(&self) -> Grid<f32> {
        match &self.visibility {
            Some(p) => Grid::from_vec(self.width, self.height, p.clone()).unwrap(),
            None => Grid::filled(self.width, self.height, 1.0),
        }
    }

    /// Confidence plane as a grid, all-ones when absent.
    pub fn confidence_grid(&self) -> Grid<f32> {
        match &self.confidence {
            Some(p) => Grid::from_vec(self.width, self.height, p.clone()).unwrap(),
            None => Grid::filled(self.width, self.height, 1.0),
        }
    }
}

/// 2x3 affine model mapping a homogeneous pixel position `[x, y, 1]`
/// to a predicted flow vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineModel {
    pub a: [[f64; 3]; 2],
}

impl AffineModel {
    pub fn translation(u: f64, v: f64) -> Self {
        Self { a: [[0.0, 0.0, u], [0.0, 0.0, v]] }
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.a[0][0] * x + self.a[0][1] * y + self.a[0][2],
            self.a[1][0] * x + self.a[1][1] * y + self.a[1][2],
        )
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().flatten().all(|v| v.is_finite())
    }
}

/// Parameters of the confidence-gated two-pass robust fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacConfig {
    /// Inlier reprojection threshold in pixels.
    pub reproj_threshold: f64,
    /// Minimal-solve iterations in the first pass.
    pub iterations: u32,
    /// Fraction of the pass-one support discarded by error before the
    /// final refit.
    pub second_pass_discard: f64,
    /// Minimum flow magnitude for a pixel to become a sample.
    pub min_flow_mag: f64,
    /// Minimum visibility for a pixel to become a sample.
    pub vis_min: f64,
    /// Minimum confidence for a pixel to become a sample.
    pub conf_min: f64,
    /// Cap on sample count; beyond it, confidence-weighted subsampling.
    pub max_points: usize,
    /// Seed for the subsampling and minimal-solve draws.
    pub seed: u64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            reproj_threshold: 2.0,
            iterations: 500,
            second_pass_discard: 0.20,
            min_flow_mag: 0.5,
            vis_min: 0.5,
            conf_min: 0.3,
            max_points: 20_000,
            seed: 0,
        }
    }
}

impl RansacConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.second_pass_discard > 0.0 && self.second_pass_discard < 1.0) {
            return Err(Error::InvalidConfig("second_pass_discard must be in (0, 1)"));
        }
        if self.reproj_threshold < 0.0 || self.min_flow_mag < 0.0 {
            return Err(Error::InvalidConfig("thresholds must be non-negative"));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be at least 1"));
        }
        if self.max_points < 3 {
            return Err(Error::InvalidConfig("max_points must be at least 3"));
        }
        Ok(())
    }
}

/// One fitting sample: pixel position, observed flow, and weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSample {
    pub pos: [f64; 2],
    pub flow: [f64; 2],
    pub weight: f64,
}

impl FlowSample {
    fn reproj_error(&self, model: &AffineModel) -> f64 {
        let (pu, pv) = model.apply(self.pos[0], self.pos[1]);
        let (du, dv) = (self.flow[0] - pu, self.flow[1] - pv);
        fmath::sqrt(du * du + dv * dv)
    }
}

/// Filters pixels by visibility, confidence, and flow magnitude into
/// weighted samples. More than `max_points` survivors are subsampled
/// without replacement with probability proportional to confidence,
/// keeping row-major order.
pub fn collect_valid_flow<R: Rng>(
    flow: &FlowField,
    cfg: &RansacConfig,
    rng: &mut R,
) -> Result<Vec<FlowSample>> {
    cfg.validate()?;
    let mut samples = Vec::new();
    for y in 0..flow.height() {
        for x in 0..flow.width() {
            let i = flow.idx(x, y);
            let vis = flow.visibility.as_ref().map_or(1.0, |p| f64::from(p[i]));
            let conf = flow.confidence.as_ref().map_or(1.0, |p| f64::from(p[i]));
            let (u, v) = (f64::from(flow.u[i]), f64::from(flow.v[i]));
            if vis >= cfg.vis_min
                && conf >= cfg.conf_min
                && fmath::sqrt(u * u + v * v) >= cfg.min_flow_mag
            {
                samples.push(FlowSample {
                    pos: [f64::from(x), f64::from(y)],
                    flow: [u, v],
                    weight: conf,
                });
            }
        }
    }
    if samples.len() < 3 {
        return Err(Error::InsufficientSupport { found: samples.len(), needed: 3 });
    }
    if samples.len() > cfg.max_points {
        samples = weighted_subsample(samples, cfg.max_points, rng);
    }
    Ok(samples)
}

/// Weighted reservoir selection: each sample draws the key
/// `ln(uniform) / weight` and the largest `k` keys win, which selects
/// without replacement proportionally to weight.
fn weighted_subsample<R: Rng>(samples: Vec<FlowSample>, k: usize, rng: &mut R) -> Vec<FlowSample> {
    let mut keyed: Vec<(f64, usize)> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| (fmath::ln(rng.random::<f64>()) / s.weight, i))
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut picked: Vec<usize> = keyed[..k].iter().map(|&(_, i)| i).collect();
    picked.sort_unstable();
    picked.into_iter().map(|i| samples[i]).collect()
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

const MIN_TRIANGLE_AREA: f64 = 1e-6;

/// Exact affine interpolation of three samples; `None` when the
/// positions span a triangle smaller than the collinearity floor.
fn solve_minimal(s: [&FlowSample; 3]) -> Option<AffineModel> {
    let [p, q, r] = s.map(|s| s.pos);
    let det = det3([[p[0], p[1], 1.0], [q[0], q[1], 1.0], [r[0], r[1], 1.0]]);
    if det.abs() < 2.0 * MIN_TRIANGLE_AREA {
        return None;
    }
    let mut a = [[0.0; 3]; 2];
    for (row, comp) in a.iter_mut().enumerate() {
        let [fu, fv, fw] = [s[0].flow[row], s[1].flow[row], s[2].flow[row]];
        comp[0] = det3([[fu, p[1], 1.0], [fv, q[1], 1.0], [fw, r[1], 1.0]]) / det;
        comp[1] = det3([[p[0], fu, 1.0], [q[0], fv, 1.0], [r[0], fw, 1.0]]) / det;
        comp[2] = det3([[p[0], p[1], fu], [q[0], q[1], fv], [r[0], r[1], fw]]) / det;
    }
    Some(AffineModel { a })
}

/// Solves the 3x3 system `S x = rhs` for two right-hand sides by
/// Gaussian elimination with partial pivoting.
fn solve3_two_rhs(mut s: [[f64; 3]; 3], mut rhs: [[f64; 2]; 3]) -> Option<[[f64; 3]; 2]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| s[a][col].abs().total_cmp(&s[b][col].abs()))?;
        if s[pivot][col].abs() < 1e-12 {
            return None;
        }
        s.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..3 {
            let f = s[row][col] / s[col][col];
            for k in col..3 {
                s[row][k] -= f * s[col][k];
            }
            for k in 0..2 {
                rhs[row][k] -= f * rhs[col][k];
            }
        }
    }
    let mut x = [[0.0; 3]; 2];
    for k in 0..2 {
        for row in (0..3).rev() {
            let mut acc = rhs[row][k];
            for col in row + 1..3 {
                acc -= s[row][col] * x[k][col];
            }
            x[k][row] = acc / s[row][row];
        }
    }
    Some(x)
}

/// Weighted least-squares affine fit over `samples`.
fn refit_weighted(samples: &[&FlowSample]) -> Option<AffineModel> {
    let mut s = [[0.0; 3]; 3];
    let mut rhs = [[0.0; 2]; 3];
    for sample in samples {
        let w = sample.weight;
        let basis = [sample.pos[0], sample.pos[1], 1.0];
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] += w * basis[i] * basis[j];
            }
            rhs[i][0] += w * basis[i] * sample.flow[0];
            rhs[i][1] += w * basis[i] * sample.flow[1];
        }
    }
    solve3_two_rhs(s, rhs).map(|a| AffineModel { a })
}

/// Two-pass robust affine fit.
///
/// Pass one repeats seeded three-point minimal solves, keeps the model
/// with the largest inlier consensus at `reproj_threshold`, and refits
/// weighted least squares on those inliers. Pass two re-gates all
/// samples under that model, discards the top `second_pass_discard`
/// fraction of the support by reprojection error, and refits on the
/// remainder.
pub fn fit_affine_ransac<R: Rng>(
    samples: &[FlowSample],
    cfg: &RansacConfig,
    rng: &mut R,
) -> Result<AffineModel> {
    cfg.validate()?;
    let n = samples.len();
    if n < 3 {
        return Err(Error::InsufficientSupport { found: n, needed: 3 });
    }

    let mut best: Option<(usize, AffineModel)> = None;
    for _ in 0..cfg.iterations {
        let (i, mut j, mut k);
        i = rng.random_range(0..n);
        loop {
            j = rng.random_range(0..n);
            if j != i {
                break;
            }
        }
        loop {
            k = rng.random_range(0..n);
            if k != i && k != j {
                break;
            }
        }
        let Some(model) = solve_minimal([&samples[i], &samples[j], &samples[k]]) else {
            continue;
        };
        let inliers = samples.iter().filter(|s| s.reproj_error(&model) <= cfg.reproj_threshold).count();
        if best.as_ref().is_none_or(|(count, _)| inliers > *count) {
            best = Some((inliers, model));
        }
    }
    let (_, candidate) = best.ok_or(Error::DegenerateGeometry)?;

    let consensus: Vec<&FlowSample> = samples
        .iter()
        .filter(|s| s.reproj_error(&candidate) <= cfg.reproj_threshold)
        .collect();
    let pass1 = refit_weighted(&consensus).ok_or(Error::DegenerateGeometry)?;

    let mut support: Vec<(f64, &FlowSample)> = samples
        .iter()
        .filter_map(|s| {
            let err = s.reproj_error(&pass1);
            (err <= cfg.reproj_threshold).then_some((err, s))
        })
        .collect();
    support.sort_by(|a, b| a.0.total_cmp(&b.0));
    let discard = (support.len() as f64 * cfg.second_pass_discard) as usize;
    let kept: Vec<&FlowSample> = support[..support.len() - discard].iter().map(|&(_, s)| s).collect();
    if kept.len() < 3 {
        return Err(Error::InsufficientSupport { found: kept.len(), needed: 3 });
    }
    refit_weighted(&kept).ok_or(Error::DegenerateGeometry)
}

/// Per-pixel Euclidean distance between the observed flow and the
/// affine prediction.
pub fn residual_flow(flow: &FlowField, model: &AffineModel) -> Grid<f32> {
    let mut out = Grid::new(flow.width(), flow.height());
    for y in 0..flow.height() {
        for x in 0..flow.width() {
            let i = flow.idx(x, y);
            let (pu, pv) = model.apply(f64::from(x), f64::from(y));
            let du = f64::from(flow.u[i]) - pu;
            let dv = f64::from(flow.v[i]) - pv;
            out.as_mut_slice()[i] = fmath::sqrt(du * du + dv * dv) as f32;
        }
    }
    out
}

/// Soft weighting `g = [visibility >= 0.5] * clip(confidence, 0, 1)^2`.
pub fn confidence_gate(visibility: &Grid<f32>, confidence: &Grid<f32>) -> Result<Grid<f32>> {
    visibility.check_same_shape(confidence)?;
    let mut out = Grid::new(visibility.width(), visibility.height());
    for (i, g) in out.as_mut_slice().iter_mut().enumerate() {
        let v = visibility.as_slice()[i];
        let c = confidence.as_slice()[i].clamp(0.0, 1.0);
        *g = if v >= 0.5 { c * c } else { 0.0 };
    }
    Ok(out)
}

/// Thresholds the gated residual at
/// `median + k_mad * 1.4826 * MAD` (strictly above). A constant gated
/// residual therefore yields an empty mask.
pub fn object_motion_mask(residual: &Grid<f32>, gate: &Grid<f32>, k_mad: f64) -> Result<BinaryMask> {
    residual.check_same_shape(gate)?;
    let gated: Vec<f64> = residual
        .as_slice()
        .iter()
        .zip(gate.as_slice())
        .map(|(&r, &g)| f64::from(r) * f64::from(g))
        .collect();
    let tau = stats::robust_threshold(&gated, k_mad)
        .ok_or(Error::InsufficientSupport { found: 0, needed: 1 })?;
    let bits = gated.iter().map(|&rg| rg > tau).collect();
    BinaryMask::from_bits(residual.width(), residual.height(), bits)
}

/// Structural cleanup applied to a raw object-motion mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CleanupConfig {
    /// Elliptical opening kernel size.
    pub open_kernel: u32,
    /// Elliptical closing kernel size.
    pub close_kernel: u32,
    /// Minimum surviving 8-connected component area in pixels.
    pub min_component: usize,
}

impl Default for CleanupConfig {
    fn default() -> Self {
        Self { open_kernel: 3, close_kernel: 7, min_component: 200 }
    }
}

/// Opening, closing, then small-component removal.
pub fn mask_cleanup(mask: &BinaryMask, cfg: &CleanupConfig) -> Result<BinaryMask> {
    let opened = mask.open(&Kernel::ellipse(cfg.open_kernel)?);
    let closed = opened.close(&Kernel::ellipse(cfg.close_kernel)?);
    Ok(closed.remove_small_components(cfg.min_component))
}

/// Everything the decomposition produces for one flow field.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub model: AffineModel,
    pub residual: Grid<f32>,
    /// Mask before morphology.
    pub raw_mask: BinaryMask,
    /// Mask after cleanup.
    pub mask: BinaryMask,
}

/// Full decomposition pipeline: sample collection, two-pass robust
/// fit (seeded from `cfg.seed`), residual, gate, threshold, cleanup.
pub fn decompose_flow(flow: &FlowField, cfg: &RansacConfig, k_mad: f64, cleanup: &CleanupConfig) -> Result<Decomposition> {
    let mut rng = crate::seeded_rng(cfg.seed);
    let samples = collect_valid_flow(flow, cfg, &mut rng)?;
    let model = fit_affine_ransac(&samples, cfg, &mut rng)?;
    let residual = residual_flow(flow, &model);
    let gate = confidence_gate(&flow.visibility_grid(), &flow.confidence_grid())?;
    let raw_mask = object_motion_mask(&residual, &gate, k_mad)?;
    let mask = mask_cleanup(&raw_mask, cleanup)?;
    Ok(Decomposition { model, residual, raw_mask, mask })
}
