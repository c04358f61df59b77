//! `teto sample`: query points from a mask with an object/uniform split.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use teto_core::{CropRect, Provenance, seeded_rng, sample_queries};

use crate::cmd::{emit, load_config};
use crate::formats::pgm::read_pgm;
use crate::formats::write_json;
use crate::Result;

#[derive(Debug, clap::Args)]
pub struct SampleArgs {
    /// Object mask PGM defining the crop-local sampling domain
    #[arg(long)]
    pub mask: PathBuf,
    /// Crop origin x in frame pixels (default: 0)
    #[arg(long)]
    pub crop_x: Option<u32>,
    /// Crop origin y in frame pixels (default: 0)
    #[arg(long)]
    pub crop_y: Option<u32>,
    /// Total query points
    #[arg(long)]
    pub n_q: usize,
    /// Fraction drawn from the mask; the rest is uniform over the crop (default: 0.9)
    #[arg(long)]
    pub object_fraction: Option<f64>,
    /// Timestamp attached to every query point, in microseconds
    #[arg(long)]
    pub t_query: i64,
    /// Seed for the point draws
    #[arg(long)]
    pub seed: u64,
    /// Query set JSON output
    #[arg(long)]
    pub out: PathBuf,
    /// JSON config file; command-line flags override its keys
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleFileConfig {
    crop_x: Option<u32>,
    crop_y: Option<u32>,
    object_fraction: Option<f64>,
}

#[derive(Debug, Serialize)]
struct PointJson {
    x: u32,
    y: u32,
    t_us: i64,
    provenance: &'static str,
}

pub fn run(args: &SampleArgs) -> Result<()> {
    let file: SampleFileConfig = load_config(args.config.as_deref())?;
    let crop_x = args.crop_x.or(file.crop_x).unwrap_or(0);
    let crop_y = args.crop_y.or(file.crop_y).unwrap_or(0);
    let object_fraction = args.object_fraction.or(file.object_fraction).unwrap_or(0.9);
    log::info!(
        "sample: mask={}, n_q={}, object_fraction={object_fraction}, seed={}",
        args.mask.display(),
        args.n_q,
        args.seed,
    );

    let mask = read_pgm(&args.mask)?;
    let crop = CropRect { x: crop_x, y: crop_y, width: mask.width(), height: mask.height() };
    let mut rng = seeded_rng(args.seed);
    let set = sample_queries(&mask, crop, args.n_q, object_fraction, args.t_query, &mut rng)?;

    let mut object = 0usize;
    let points: Vec<PointJson> = set
        .points
        .iter()
        .map(|p| PointJson {
            x: p.x,
            y: p.y,
            t_us: p.t_us,
            provenance: match p.provenance {
                Provenance::Object => {
                    object += 1;
                    "object"
                }
                Provenance::Uniform => "uniform",
            },
        })
        .collect();
    let uniform = points.len() - object;

    write_json(
        &args.out,
        &serde_json::json!({ "points": points, "fallback_uniform": set.fallback_uniform }),
    )?;
    emit(&serde_json::json!({
        "object": object,
        "uniform": uniform,
        "fallback_uniform": set.fallback_uniform,
    }));
    Ok(())
}
