//! `teto curate`: crop proposal and training-pool assembly.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};
use teto_core::{
    CropRect, CurationEntry, SequenceStats, build_pool, curate_crop, event_density_topk,
    seeded_rng, sequence_weights,
};

use crate::cmd::{emit, load_config};
use crate::formats::events::load_events;
use crate::formats::pgm::read_pgm;
use crate::formats::pool::{
    CropJson, PoolSummary, SequenceSummary, read_jsonl, write_jsonl, write_pool, write_summary,
};
use crate::{Result, ToolError};

#[derive(Debug, clap::Subcommand)]
pub enum CurateCommand {
    /// Rank dense event patches and map them to clamped frame crops
    Propose(ProposeArgs),
    /// Filter candidate crops by mask coverage and assemble the pool
    Build(BuildArgs),
}

#[derive(Debug, clap::Args)]
pub struct ProposeArgs {
    /// Event stream file, binary or .csv
    #[arg(long)]
    pub events: PathBuf,
    /// Density patch edge in event pixels (default: 64)
    #[arg(long)]
    pub patch: Option<u32>,
    /// Number of proposals, densest first (default: 3)
    #[arg(long)]
    pub k: Option<usize>,
    /// Width of the frame the crops are placed in
    #[arg(long)]
    pub frame_width: u32,
    /// Height of the frame the crops are placed in
    #[arg(long)]
    pub frame_height: u32,
    /// Crop width in frame pixels (default: 512)
    #[arg(long)]
    pub crop_width: Option<u32>,
    /// Crop height in frame pixels (default: 384)
    #[arg(long)]
    pub crop_height: Option<u32>,
    /// Only count events at or after this timestamp
    #[arg(long)]
    pub from_us: Option<i64>,
    /// Only count events before this timestamp
    #[arg(long)]
    pub to_us: Option<i64>,
    /// Sequence name for the emitted candidates (default: events file stem)
    #[arg(long)]
    pub sequence: Option<String>,
    /// Start frame for the emitted candidates (default: 0)
    #[arg(long)]
    pub start_frame: Option<u32>,
    /// Candidate crops as JSON lines, one per proposal, ready for
    /// `curate build` once each mask_path is filled in
    #[arg(long)]
    pub out: PathBuf,
    /// JSON config file; command-line flags override its keys
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProposeFileConfig {
    patch: Option<u32>,
    k: Option<usize>,
    crop_width: Option<u32>,
    crop_height: Option<u32>,
}

/// Centers a crop of `crop` pixels on `center` along one axis of a
/// `frame`-pixel frame, clamped so the crop stays inside.
fn clamp_crop_origin(center: f64, crop: u32, frame: u32) -> u32 {
    let half = f64::from(crop) / 2.0;
    let origin = (center - half).round().max(0.0) as u32;
    origin.min(frame - crop)
}

pub fn run_propose(args: &ProposeArgs) -> Result<()> {
    let file: ProposeFileConfig = load_config(args.config.as_deref())?;
    let patch = args.patch.or(file.patch).unwrap_or(64);
    let k = args.k.or(file.k).unwrap_or(3);
    let crop_width = args.crop_width.or(file.crop_width).unwrap_or(512);
    let crop_height = args.crop_height.or(file.crop_height).unwrap_or(384);
    if patch == 0 {
        return Err(ToolError::Config("patch must be at least 1".into()));
    }
    if crop_width == 0 || crop_height == 0 {
        return Err(ToolError::Config("crop dimensions must be positive".into()));
    }
    if crop_width > args.frame_width || crop_height > args.frame_height {
        return Err(ToolError::Config(format!(
            "crop {crop_width}x{crop_height} exceeds frame {}x{}",
            args.frame_width, args.frame_height,
        )));
    }
    log::info!(
        "curate propose: events={}, patch={patch}, k={k}, crop={crop_width}x{crop_height}",
        args.events.display(),
    );

    let stream = load_events(&args.events)?;
    let from = args.from_us.unwrap_or(i64::MIN);
    let to = args.to_us.unwrap_or(i64::MAX);
    let slice = stream.time_slice(from, to);
    let cells = event_density_topk(slice, stream.width(), stream.height(), patch, k);

    let sequence = args.sequence.clone().unwrap_or_else(|| {
        args.events
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "sequence".into())
    });
    let start_frame = args.start_frame.unwrap_or(0);
    let candidates: Vec<CandidateRecord> = cells
        .iter()
        .map(|cell| {
            let cx = f64::from((cell.col * patch + patch / 2).min(stream.width() - 1));
            let cy = f64::from((cell.row * patch + patch / 2).min(stream.height() - 1));
            let fx = cx / f64::from(stream.width()) * f64::from(args.frame_width);
            let fy = cy / f64::from(stream.height()) * f64::from(args.frame_height);
            let crop = CropRect {
                x: clamp_crop_origin(fx, crop_width, args.frame_width),
                y: clamp_crop_origin(fy, crop_height, args.frame_height),
                width: crop_width,
                height: crop_height,
            };
            CandidateRecord {
                sequence: sequence.clone(),
                start_frame,
                crop: crop.into(),
                mask_path: None,
                event_count: Some(cell.count),
                patch_row: Some(cell.row),
                patch_col: Some(cell.col),
            }
        })
        .collect();

    write_jsonl(&args.out, &candidates)?;
    emit(&serde_json::json!({ "proposals": cells.len(), "out": args.out.display().to_string() }));
    Ok(())
}

#[derive(Debug, clap::Args)]
pub struct BuildArgs {
    /// Candidate crops as JSON lines with sequence, start_frame, crop, mask_path
    #[arg(long)]
    pub candidates: PathBuf,
    /// Coverage a mask needs for its crop to enter the pool (default: 0.05)
    #[arg(long)]
    pub min_area_ratio: Option<f64>,
    /// Softmax temperature over sequence motion ratios (default: 2)
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Seed for pool draws
    #[arg(long)]
    pub seed: u64,
    /// Number of weighted draws to emit
    #[arg(long)]
    pub draw: Option<usize>,
    /// Accepted pool as JSON lines
    #[arg(long)]
    pub out_pool: PathBuf,
    /// Sequence statistics JSON output
    #[arg(long)]
    pub out_stats: PathBuf,
    /// Drawn entries as JSON lines, requires --draw
    #[arg(long)]
    pub out_draw: Option<PathBuf>,
    /// JSON config file; command-line flags override its keys
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BuildFileConfig {
    min_area_ratio: Option<f64>,
    temperature: Option<f64>,
}

/// One candidate line, as written by `curate propose` and read back by
/// `curate build`. The descriptive patch fields are carried through
/// untouched; only build requires `mask_path` to be filled in.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CandidateRecord {
    sequence: String,
    start_frame: u32,
    crop: CropJson,
    /// Mask PGM, relative to the candidates file.
    mask_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    event_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    patch_row: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    patch_col: Option<u32>,
}

fn judge(
    base: &Path,
    record: &CandidateRecord,
    min_area_ratio: f64,
) -> Result<Option<CurationEntry>> {
    let mask_path = record.mask_path.as_deref().ok_or_else(|| {
        ToolError::Config(format!(
            "candidate for {} start {} has no mask_path; fill it in before building",
            record.sequence, record.start_frame,
        ))
    })?;
    let crop = CropRect::from(record.crop);
    let mask = read_pgm(&base.join(mask_path))?;
    if (mask.width(), mask.height()) != (crop.width, crop.height) {
        return Err(ToolError::Config(format!(
            "mask {mask_path} is {}x{} but its crop is {}x{}",
            mask.width(),
            mask.height(),
            crop.width,
            crop.height,
        )));
    }
    let outcome =
        curate_crop(&record.sequence, record.start_frame, crop, &mask, mask_path, min_area_ratio);
    Ok(outcome.accepted().cloned())
}

pub fn run_build(args: &BuildArgs) -> Result<()> {
    let file: BuildFileConfig = load_config(args.config.as_deref())?;
    let min_area_ratio = args.min_area_ratio.or(file.min_area_ratio).unwrap_or(0.05);
    let temperature = args.temperature.or(file.temperature).unwrap_or(2.0);
    if args.out_draw.is_some() && args.draw.is_none() {
        return Err(ToolError::Config("--out-draw requires --draw".into()));
    }
    log::info!(
        "curate build: candidates={}, min_area_ratio={min_area_ratio}, temperature={temperature}, seed={}",
        args.candidates.display(),
        args.seed,
    );

    let records: Vec<CandidateRecord> = read_jsonl(&args.candidates)?;
    let base = args.candidates.parent().unwrap_or(Path::new(".")).to_path_buf();

    // Candidates are grouped by (sequence, start) in sorted order so the
    // pool does not depend on line order in the input file.
    let mut grouped: BTreeMap<String, BTreeMap<u32, Vec<CurationEntry>>> = BTreeMap::new();
    let mut rejected = 0usize;
    for record in &records {
        let slot = grouped
            .entry(record.sequence.clone())
            .or_default()
            .entry(record.start_frame)
            .or_default();
        match judge(&base, record, min_area_ratio)? {
            Some(entry) => slot.push(entry),
            None => rejected += 1,
        }
    }

    let mut pool: Vec<CurationEntry> = Vec::new();
    let mut stats: Vec<SequenceStats> = Vec::new();
    let mut spans: Vec<(usize, usize)> = Vec::new();
    for (sequence, starts) in &grouped {
        let starts: Vec<(u32, Vec<CurationEntry>)> =
            starts.iter().map(|(s, v)| (*s, v.clone())).collect();
        let (entries, stat) = build_pool(sequence, &starts);
        spans.push((pool.len(), entries.len()));
        pool.extend(entries);
        stats.push(stat);
    }
    let weights = sequence_weights(&stats, temperature)?;

    write_pool(&args.out_pool, &pool)?;
    let summary = PoolSummary {
        temperature,
        min_area_ratio,
        accepted: pool.len(),
        rejected,
        sequences: stats
            .iter()
            .zip(&weights)
            .map(|(s, &w)| SequenceSummary {
                sequence: s.sequence.clone(),
                motion_ratio: s.motion_ratio,
                entry_count: s.entry_count,
                weight: w,
            })
            .collect(),
    };
    write_summary(&args.out_stats, &summary)?;

    if let Some(n) = args.draw {
        let drawn = draw_entries(&pool, &spans, &weights, n, args.seed)?;
        if let Some(p) = &args.out_draw {
            write_pool(p, &drawn)?;
        }
    }
    emit(&serde_json::json!({
        "accepted": pool.len(),
        "rejected": rejected,
        "sequences": stats.len(),
    }));
    Ok(())
}

/// Draws `n` entries: a sequence by softmax weight, then one of its pool
/// entries uniformly. Sequences with empty pools are excluded and the
/// remaining weights renormalized.
fn draw_entries(
    pool: &[CurationEntry],
    spans: &[(usize, usize)],
    weights: &[f64],
    n: usize,
    seed: u64,
) -> Result<Vec<CurationEntry>> {
    let eligible: Vec<usize> = (0..spans.len()).filter(|&i| spans[i].1 > 0).collect();
    if eligible.is_empty() {
        return Err(ToolError::Config("cannot draw from an empty pool".into()));
    }
    let total: f64 = eligible.iter().map(|&i| weights[i]).sum();
    let mut rng = seeded_rng(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = *eligible.last().expect("eligible is non-empty");
        for &i in &eligible {
            acc += weights[i];
            if target < acc {
                chosen = i;
                break;
            }
        }
        let (offset, len) = spans[chosen];
        out.push(pool[offset + rng.random_range(0..len)].clone());
    }
    Ok(out)
}
