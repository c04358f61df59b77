//! `teto stack`: multi-bin event stacks at reference timestamps.

use std::fs;
use std::path::PathBuf;

use serde::Deserialize;
use teto_core::{StackConfig, build_event_stack};

use crate::cmd::{emit, load_config};
use crate::formats::events::load_events;
use crate::formats::stack::write_stack;
use crate::{Result, ToolError};

#[derive(Debug, clap::Args)]
pub struct StackArgs {
    /// Event stream file, binary or .csv
    #[arg(long)]
    pub events: PathBuf,
    /// Reference timestamps in microseconds, comma-separated or repeated
    #[arg(long = "t", required = true, value_delimiter = ',')]
    pub timestamps: Vec<i64>,
    /// Events accumulated per stack (default: 300000)
    #[arg(long)]
    pub num_events: Option<u64>,
    /// Temporal bins per stack (default: 10)
    #[arg(long)]
    pub bins: Option<u32>,
    /// Directory receiving stack_<t>.bin and stack_<t>.json per timestamp
    #[arg(long)]
    pub out_dir: PathBuf,
    /// JSON config file; command-line flags override its keys
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct StackFileConfig {
    num_events: Option<u64>,
    bins: Option<u32>,
}

pub fn run(args: &StackArgs) -> Result<()> {
    let file: StackFileConfig = load_config(args.config.as_deref())?;
    let num_events = args.num_events.or(file.num_events).unwrap_or(300_000);
    let bins = args.bins.or(file.bins).unwrap_or(10);
    let cfg = StackConfig::new(num_events, bins)?;
    log::info!(
        "stack: events={}, timestamps={:?}, num_events={num_events}, bins={bins}",
        args.events.display(),
        args.timestamps,
    );
    if cfg.quota_clamped() {
        log::warn!("num_events {num_events} leaves shallow bins clamped to a single event");
    }

    let stream = load_events(&args.events)?;
    fs::create_dir_all(&args.out_dir).map_err(|e| ToolError::io(&args.out_dir, e))?;
    for &t in &args.timestamps {
        let stack = build_event_stack(&stream, t, &cfg);
        let bin = args.out_dir.join(format!("stack_{t}.bin"));
        let json = args.out_dir.join(format!("stack_{t}.json"));
        write_stack(&bin, &json, &stack)?;
    }
    emit(&serde_json::json!({
        "stacks": args.timestamps.len(),
        "bins": bins,
        "num_events": num_events,
        "out_dir": args.out_dir.display().to_string(),
    }));
    Ok(())
}
