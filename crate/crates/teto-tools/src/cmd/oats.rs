//! `teto oats`: trajectory occlusion-aware tracking scores.

use std::path::PathBuf;

use teto_core::oats_suite;

use crate::cmd::emit;
use crate::formats::masks::load_mask_sequence;
use crate::formats::pgm::read_pgm;
use crate::formats::tracks::read_tracks;
use crate::formats::{write_bytes, write_json};
use crate::Result;

#[derive(Debug, clap::Args)]
pub struct OatsArgs {
    /// Trajectory set in track binary layout
    #[arg(long)]
    pub tracks: PathBuf,
    /// Object mask manifest JSON mapping frame index to id-to-PGM paths
    #[arg(long)]
    pub masks: PathBuf,
    /// Event motion mask PGM gating the object assignment
    #[arg(long)]
    pub event_mask: PathBuf,
    /// Scene label used in report rows (default: scene)
    #[arg(long)]
    pub scene: Option<String>,
    /// Score report JSON output
    #[arg(long)]
    pub out_json: PathBuf,
    /// Optional one-row CSV with per-threshold and average scores
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
}

pub fn run(args: &OatsArgs) -> Result<()> {
    let scene = args.scene.clone().unwrap_or_else(|| "scene".into());
    log::info!(
        "oats: tracks={}, masks={}, scene={scene}",
        args.tracks.display(),
        args.masks.display(),
    );

    let tracks = read_tracks(&args.tracks)?;
    let masks = load_mask_sequence(&args.masks)?;
    let event_mask = read_pgm(&args.event_mask)?;
    let report = oats_suite(&tracks, &masks, &event_mask)?;

    let per_delta: Vec<serde_json::Value> = report
        .per_delta
        .iter()
        .map(|d| {
            serde_json::json!({
                "delta": d.delta,
                "score": d.score,
                "evaluated_queries": d.evaluated_queries,
            })
        })
        .collect();
    let summary = serde_json::json!({
        "scene": scene,
        "per_delta": per_delta,
        "average": report.average,
        "total_queries": report.total_queries,
        "evaluated_queries": report.evaluated_queries,
        "excluded_queries": report.excluded_queries,
    });
    write_json(&args.out_json, &summary)?;

    if let Some(p) = &args.out_csv {
        let mut csv = String::from("scene,oats_0,oats_1,oats_2,oats_4,oats_8,oats_16,oats_avg\n");
        csv.push_str(&scene);
        for d in &report.per_delta {
            csv.push_str(&format!(",{}", d.score));
        }
        csv.push_str(&format!(",{}\n", report.average));
        write_bytes(p, csv.as_bytes())?;
    }
    emit(&summary);
    Ok(())
}
