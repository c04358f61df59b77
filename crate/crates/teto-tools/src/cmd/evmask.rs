//! `teto evmask`: event motion masks at frame timestamps.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use teto_core::{
    MaskWindowConfig, event_motion_mask_single_scale, event_motion_mask_two_scale,
};

use crate::cmd::{emit, load_config};
use crate::formats::events::load_events;
use crate::formats::pgm::write_pgm;
use crate::formats::read_bytes;
use crate::{Result, ToolError};

#[derive(Debug, clap::Args)]
pub struct EvmaskArgs {
    /// Event stream file, binary or .csv
    #[arg(long)]
    pub events: PathBuf,
    /// Frame timestamps in microseconds, one per line
    #[arg(long)]
    pub frames: PathBuf,
    /// Window mode, count or time (default: count)
    #[arg(long)]
    pub mode: Option<String>,
    /// Wide window event count per side, count mode (default: 10000)
    #[arg(long)]
    pub n_wide: Option<usize>,
    /// Narrow window event count, count mode (default: 1000)
    #[arg(long)]
    pub n_narrow: Option<usize>,
    /// Wide half-window in microseconds, time mode
    #[arg(long)]
    pub delta_wide_us: Option<i64>,
    /// Narrow overlap in microseconds, time mode
    #[arg(long)]
    pub delta_narrow_us: Option<i64>,
    /// Directory receiving mask_<t>.pgm per frame timestamp
    #[arg(long)]
    pub out_dir: PathBuf,
    /// JSON config file; command-line flags override its keys
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvmaskFileConfig {
    mode: Option<String>,
    n_wide: Option<usize>,
    n_narrow: Option<usize>,
    delta_wide_us: Option<i64>,
    delta_narrow_us: Option<i64>,
}

fn read_frame_times(path: &Path) -> Result<Vec<i64>> {
    let bytes = read_bytes(path)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| ToolError::parse(path, e.valid_up_to() as u64, "not valid UTF-8"))?;
    let mut times = Vec::new();
    let mut offset = 0u64;
    for line in text.lines() {
        let line_start = offset;
        offset += line.len() as u64 + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let t: i64 = line.parse().map_err(|_| {
            ToolError::parse(path, line_start, format!("invalid timestamp {line:?}"))
        })?;
        times.push(t);
    }
    if times.is_empty() {
        return Err(ToolError::parse(path, 0, "no frame timestamps"));
    }
    Ok(times)
}

pub fn run(args: &EvmaskArgs) -> Result<()> {
    let file: EvmaskFileConfig = load_config(args.config.as_deref())?;
    let mode = args.mode.clone().or(file.mode).unwrap_or_else(|| "count".into());
    let cfg = match mode.as_str() {
        "count" => MaskWindowConfig::CountBased {
            n_wide: args.n_wide.or(file.n_wide).unwrap_or(10_000),
            n_narrow: args.n_narrow.or(file.n_narrow).unwrap_or(1_000),
        },
        "time" => MaskWindowConfig::TimeBased {
            delta_wide_us: args
                .delta_wide_us
                .or(file.delta_wide_us)
                .ok_or_else(|| ToolError::Config("time mode needs --delta-wide-us".into()))?,
            delta_narrow_us: args
                .delta_narrow_us
                .or(file.delta_narrow_us)
                .ok_or_else(|| ToolError::Config("time mode needs --delta-narrow-us".into()))?,
        },
        other => {
            return Err(ToolError::Config(format!("unknown mode {other:?}, use count or time")));
        }
    };
    log::info!("evmask: events={}, mode={mode}, cfg={cfg:?}", args.events.display());

    let stream = load_events(&args.events)?;
    let times = read_frame_times(&args.frames)?;
    fs::create_dir_all(&args.out_dir).map_err(|e| ToolError::io(&args.out_dir, e))?;
    for (i, &t) in times.iter().enumerate() {
        let mask = match cfg {
            MaskWindowConfig::CountBased { .. } => {
                let t_prev = times[i.max(1) - 1];
                event_motion_mask_two_scale(&stream, t_prev, t, &cfg)?
            }
            MaskWindowConfig::TimeBased { .. } => {
                event_motion_mask_single_scale(&stream, t, &cfg)?
            }
        };
        write_pgm(&args.out_dir.join(format!("mask_{t}.pgm")), &mask)?;
    }
    emit(&serde_json::json!({
        "masks": times.len(),
        "mode": mode,
        "out_dir": args.out_dir.display().to_string(),
    }));
    Ok(())
}
