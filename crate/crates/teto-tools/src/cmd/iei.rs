//! `teto iei`: per-pixel inter-event interval histogram of one stream.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use teto_core::{IeiHistogram, compute_iei, iei_histogram};

use crate::cmd::{emit, load_config};
use crate::formats::events::load_events;
use crate::formats::{write_bytes, write_json};
use crate::Result;

#[derive(Debug, clap::Args)]
pub struct IeiArgs {
    /// Event stream file, binary or .csv
    #[arg(long)]
    pub events: PathBuf,
    /// Histogram bins (default: 200)
    #[arg(long)]
    pub bins: Option<u32>,
    /// Upper range edge in microseconds (default: 99.9th percentile of the intervals)
    #[arg(long)]
    pub max_us: Option<i64>,
    /// CSV output with bin_left_us,density rows
    #[arg(long)]
    pub out_csv: PathBuf,
    /// Optional JSON summary output
    #[arg(long)]
    pub out_json: Option<PathBuf>,
    /// JSON config file; command-line flags override its keys
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct IeiFileConfig {
    bins: Option<u32>,
    max_us: Option<i64>,
}

pub(crate) fn write_histogram_csv(path: &Path, hist: &IeiHistogram) -> Result<()> {
    let width = hist.bin_width_us();
    let mut csv = String::from("bin_left_us,density\n");
    for (i, d) in hist.density.iter().enumerate() {
        csv.push_str(&format!("{},{d}\n", i as f64 * width));
    }
    write_bytes(path, csv.as_bytes())
}

pub(crate) fn summary_json(hist: &IeiHistogram, mean_us: f64) -> serde_json::Value {
    serde_json::json!({
        "samples": hist.total_samples,
        "mean_us": mean_us,
        "bins": hist.bins,
        "iei_max_us": hist.iei_max_us,
        "bin_width_us": hist.bin_width_us(),
    })
}

pub fn run(args: &IeiArgs) -> Result<()> {
    let file: IeiFileConfig = load_config(args.config.as_deref())?;
    let bins = args.bins.or(file.bins).unwrap_or(200);
    let max_us = args.max_us.or(file.max_us);
    log::info!("iei: events={}, bins={bins}, max_us={max_us:?}", args.events.display());

    let stream = load_events(&args.events)?;
    let intervals = compute_iei(&stream);
    let hist = iei_histogram(&intervals, bins, max_us)?;
    let mean_us = intervals.iter().map(|&d| d as f64).sum::<f64>() / intervals.len() as f64;

    write_histogram_csv(&args.out_csv, &hist)?;
    let summary = summary_json(&hist, mean_us);
    if let Some(p) = &args.out_json {
        write_json(p, &summary)?;
    }
    emit(&summary);
    Ok(())
}
