//! Core algorithms for an event-camera point-tracking data pipeline.
//!
//! Everything in this crate operates on in-memory buffers and is
//! deterministic for a fixed seed. File formats and the command line
//! front-end live in the companion `teto-tools` crate.
//!
//! The main areas are:
//!
//! * [`event`]: validated event streams and multi-bin event stacks.
//! * [`iei`]: inter-event interval statistics and stream comparison.
//! * [`flow`]: robust affine decomposition of optical flow and the
//!   derived object motion mask.
//! * [`curation`]: crop acceptance, pool construction, sequence
//!   weighting, and query sampling for training data.
//! * [`evmask`]: activation-based event motion masks.
//! * [`oats`]: occlusion-aware trajectory adherence scoring.
//! * [`distill`]: supervision losses, soft argmax, warping, blending.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod curation;
pub mod distill;
pub mod error;
pub mod event;
pub mod evmask;
pub mod flow;
pub mod grid;
pub mod iei;
pub mod mask;
pub mod oats;
pub mod stats;

mod fmath;

pub use error::Error;

pub use curation::{
    CropOutcome, CropRect, CurationEntry, MAX_ENTRIES_PER_START, Provenance, QueryPoint, QuerySet,
    RejectReason, SequenceStats, build_pool, curate_crop, sample_queries, sequence_weights,
};
pub use distill::{
    Image, LossConfig, OCCLUDED_WEIGHT, TrackPoints, attention_traj_loss, average_bidirectional,
    backward_warp, blend_bidirectional, flow_loss, huber, soft_argmax, total_loss, track_loss,
};
pub use event::{
    Event, EventStack, EventStream, PatchDensity, StackConfig, WindowSide, accumulate_polarity,
    build_event_stack, event_density_topk,
};
pub use evmask::{
    MaskWindowConfig, activation_map, event_motion_mask_simple, event_motion_mask_single_scale,
    event_motion_mask_two_scale, narrow_activation, wide_activation,
};
pub use flow::{
    AffineModel, CleanupConfig, Decomposition, FlowField, FlowSample, RansacConfig,
    collect_valid_flow, confidence_gate, decompose_flow, fit_affine_ransac, mask_cleanup,
    object_motion_mask, residual_flow,
};
pub use grid::Grid;
pub use iei::{
    IeiHistogram, StreamComparison, auto_range_us, compare_streams, compute_iei, iei_histogram,
};
pub use mask::{BinaryMask, Kernel};
pub use oats::{
    DELTAS, DeltaScore, OatsReport, ObjectMaskSequence, TrajectorySet, VISIBILITY_CUT, assign_queries,
    average_of, dilate_mask, oats_delta, oats_suite, rasterize,
};
pub use stats::{MAD_SCALE, mad, median, robust_threshold};

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// The deterministic generator used by every seeded operation. One
/// seed reproduces byte-identical results on any platform.
pub fn seeded_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
