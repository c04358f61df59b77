//! `teto compare`: interval statistics of two streams on shared bins.

use std::path::PathBuf;

use serde::Deserialize;
use teto_core::compare_streams;

use crate::cmd::iei::write_histogram_csv;
use crate::cmd::{emit, load_config};
use crate::formats::events::load_events;
use crate::formats::write_json;
use crate::Result;

#[derive(Debug, clap::Args)]
pub struct CompareArgs {
    /// Reference event stream, binary or .csv
    #[arg(long)]
    pub real: PathBuf,
    /// Candidate event stream, binary or .csv
    #[arg(long)]
    pub synth: PathBuf,
    /// Histogram bins (default: 200)
    #[arg(long)]
    pub bins: Option<u32>,
    /// Shared range edge in microseconds (default: larger of the two 99.9th percentiles)
    #[arg(long)]
    pub max_us: Option<i64>,
    /// JSON report output
    #[arg(long)]
    pub out_json: PathBuf,
    /// Optional CSV of the reference histogram
    #[arg(long)]
    pub out_real_csv: Option<PathBuf>,
    /// Optional CSV of the candidate histogram
    #[arg(long)]
    pub out_synth_csv: Option<PathBuf>,
    /// JSON config file; command-line flags override its keys
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompareFileConfig {
    bins: Option<u32>,
    max_us: Option<i64>,
}

pub fn run(args: &CompareArgs) -> Result<()> {
    let file: CompareFileConfig = load_config(args.config.as_deref())?;
    let bins = args.bins.or(file.bins).unwrap_or(200);
    let max_us = args.max_us.or(file.max_us);
    log::info!(
        "compare: real={}, synth={}, bins={bins}, max_us={max_us:?}",
        args.real.display(),
        args.synth.display(),
    );

    let real = load_events(&args.real)?;
    let synth = load_events(&args.synth)?;
    let report = compare_streams(&real, &synth, bins, max_us)?;

    if let Some(p) = &args.out_real_csv {
        write_histogram_csv(p, &report.real)?;
    }
    if let Some(p) = &args.out_synth_csv {
        write_histogram_csv(p, &report.synth)?;
    }
    let summary = serde_json::json!({
        "real_mean_us": report.real_mean_us,
        "synth_mean_us": report.synth_mean_us,
        "mean_ratio": report.mean_ratio,
        "bins": bins,
        "iei_max_us": report.real.iei_max_us,
    });
    write_json(&args.out_json, &summary)?;
    emit(&summary);
    Ok(())
}
