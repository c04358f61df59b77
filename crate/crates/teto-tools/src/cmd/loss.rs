//! `teto loss`: distillation losses from prediction tensors.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use teto_core::{
    FlowField, LossConfig, TrackPoints, attention_traj_loss, average_bidirectional, flow_loss,
    total_loss, track_loss,
};

use crate::cmd::{emit, load_config};
use crate::formats::tensor::read_tensor;
use crate::formats::write_json;
use crate::{Result, ToolError};

#[derive(Debug, clap::Args)]
pub struct LossArgs {
    /// Refined track tensors of shape [N_q, T, 2], one per iteration
    #[arg(long, required = true, value_delimiter = ',')]
    pub pred_tracks: Vec<PathBuf>,
    /// Pseudo-label tracks of shape [N_q, T, 2]
    #[arg(long)]
    pub pseudo_tracks: PathBuf,
    /// Teacher visibility of shape [N_q, T]
    #[arg(long)]
    pub visibility: PathBuf,
    /// Teacher confidence of shape [N_q, T]
    #[arg(long)]
    pub confidence: PathBuf,
    /// Refined flow tensors of shape [H, W, 2], one per iteration
    #[arg(long, value_delimiter = ',')]
    pub pred_flows: Vec<PathBuf>,
    /// Pseudo-label flow of shape [H, W, 2]
    #[arg(long)]
    pub pseudo_flow: Option<PathBuf>,
    /// Forward attention positions of shape [T, 2]
    #[arg(long)]
    pub attn_pred: Option<PathBuf>,
    /// Backward attention positions of shape [T, 2]
    #[arg(long)]
    pub attn_pred_backward: Option<PathBuf>,
    /// Attention target positions of shape [T, 2]
    #[arg(long)]
    pub attn_target: Option<PathBuf>,
    /// Attention target visibility of shape [T]
    #[arg(long)]
    pub attn_visibility: Option<PathBuf>,
    /// Query frame excluded from attention supervision
    #[arg(long)]
    pub attn_query_frame: Option<usize>,
    /// Per-iteration decay (default: 0.8)
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Trajectory term weight (default: 1)
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Flow term weight in the total (default: 0.01)
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Visibility cut for full supervision weight (default: 0.5)
    #[arg(long)]
    pub visibility_cut: Option<f32>,
    /// Confidence cut for supervision (default: 0.3)
    #[arg(long)]
    pub confidence_cut: Option<f32>,
    /// Quadratic-to-linear transition of the attention penalty (default: 1)
    #[arg(long)]
    pub huber_delta: Option<f64>,
    /// Optional JSON output; the same document is printed on stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file; command-line flags override its keys
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LossFileConfig {
    gamma: Option<f64>,
    alpha: Option<f64>,
    lambda: Option<f64>,
    visibility_cut: Option<f32>,
    confidence_cut: Option<f32>,
    huber_delta: Option<f64>,
}

/// Reads a [N_q, T, 2] tensor as track points.
fn read_track_tensor(path: &Path) -> Result<(TrackPoints, u32, u32)> {
    let (shape, data) = read_tensor(path)?;
    let [n_q, frames, two] = shape[..] else {
        return Err(ToolError::Config(format!(
            "{} must have shape [N_q, T, 2], found {shape:?}",
            path.display(),
        )));
    };
    if two != 2 {
        return Err(ToolError::Config(format!(
            "{} must have shape [N_q, T, 2], found {shape:?}",
            path.display(),
        )));
    }
    let points: Vec<[f32; 2]> = data.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
    let tracks = TrackPoints::new(n_q as usize, frames as usize, points)?;
    Ok((tracks, n_q, frames))
}

/// Reads a [H, W, 2] tensor as a flow field without gating channels.
fn read_flow_tensor(path: &Path) -> Result<FlowField> {
    let (shape, data) = read_tensor(path)?;
    let [height, width, two] = shape[..] else {
        return Err(ToolError::Config(format!(
            "{} must have shape [H, W, 2], found {shape:?}",
            path.display(),
        )));
    };
    if two != 2 {
        return Err(ToolError::Config(format!(
            "{} must have shape [H, W, 2], found {shape:?}",
            path.display(),
        )));
    }
    let mut u = Vec::with_capacity(data.len() / 2);
    let mut v = Vec::with_capacity(data.len() / 2);
    for c in data.chunks_exact(2) {
        u.push(c[0]);
        v.push(c[1]);
    }
    Ok(FlowField::new(width, height, u, v, None, None)?)
}

/// Reads a [T, 2] tensor as one trajectory.
fn read_traj_tensor(path: &Path) -> Result<Vec<[f32; 2]>> {
    let (shape, data) = read_tensor(path)?;
    let [_, two] = shape[..] else {
        return Err(ToolError::Config(format!(
            "{} must have shape [T, 2], found {shape:?}",
            path.display(),
        )));
    };
    if two != 2 {
        return Err(ToolError::Config(format!(
            "{} must have shape [T, 2], found {shape:?}",
            path.display(),
        )));
    }
    Ok(data.chunks_exact(2).map(|c| [c[0], c[1]]).collect())
}

fn attention_term(args: &LossArgs, huber_delta: f64) -> Result<Option<f64>> {
    let wanted = [
        args.attn_pred.is_some(),
        args.attn_target.is_some(),
        args.attn_visibility.is_some(),
        args.attn_query_frame.is_some(),
    ];
    if wanted.iter().all(|w| !w) {
        if args.attn_pred_backward.is_some() {
            return Err(ToolError::Config(
                "--attn-pred-backward needs the forward attention flags".into(),
            ));
        }
        return Ok(None);
    }
    if !wanted.iter().all(|w| *w) {
        return Err(ToolError::Config(
            "attention needs --attn-pred, --attn-target, --attn-visibility and --attn-query-frame"
                .into(),
        ));
    }
    let pred = read_traj_tensor(args.attn_pred.as_ref().expect("checked above"))?;
    let target = read_traj_tensor(args.attn_target.as_ref().expect("checked above"))?;
    let (shape, vis_data) = read_tensor(args.attn_visibility.as_ref().expect("checked above"))?;
    if shape.len() != 1 {
        return Err(ToolError::Config(format!(
            "attention visibility must have shape [T], found {shape:?}",
        )));
    }
    let query_frame = args.attn_query_frame.expect("checked above");
    let forward = attention_traj_loss(&pred, &target, &vis_data, query_frame, huber_delta)?;
    match &args.attn_pred_backward {
        Some(p) => {
            let backward_pred = read_traj_tensor(p)?;
            let backward =
                attention_traj_loss(&backward_pred, &target, &vis_data, query_frame, huber_delta)?;
            Ok(Some(average_bidirectional(forward, backward)))
        }
        None => Ok(Some(forward)),
    }
}

pub fn run(args: &LossArgs) -> Result<()> {
    let file: LossFileConfig = load_config(args.config.as_deref())?;
    let defaults = LossConfig::default();
    let cfg = LossConfig {
        refinement_iterations: args.pred_tracks.len(),
        gamma: args.gamma.or(file.gamma).unwrap_or(defaults.gamma),
        alpha: args.alpha.or(file.alpha).unwrap_or(defaults.alpha),
        lambda: args.lambda.or(file.lambda).unwrap_or(defaults.lambda),
        visibility_cut: args
            .visibility_cut
            .or(file.visibility_cut)
            .unwrap_or(defaults.visibility_cut),
        confidence_cut: args
            .confidence_cut
            .or(file.confidence_cut)
            .unwrap_or(defaults.confidence_cut),
        huber_delta: args.huber_delta.or(file.huber_delta).unwrap_or(defaults.huber_delta),
    };
    log::info!(
        "loss: iterations={}, gamma={}, alpha={}, lambda={}",
        cfg.refinement_iterations,
        cfg.gamma,
        cfg.alpha,
        cfg.lambda,
    );

    let mut preds = Vec::with_capacity(args.pred_tracks.len());
    let mut dims: Option<(u32, u32)> = None;
    for p in &args.pred_tracks {
        let (tracks, n_q, frames) = read_track_tensor(p)?;
        if *dims.get_or_insert((n_q, frames)) != (n_q, frames) {
            return Err(ToolError::Config(format!(
                "{} disagrees with the first prediction's [N_q, T]",
                p.display(),
            )));
        }
        preds.push(tracks);
    }
    let (n_q, frames) = dims.expect("pred_tracks is non-empty");
    let (pseudo, pn, pf) = read_track_tensor(&args.pseudo_tracks)?;
    if (pn, pf) != (n_q, frames) {
        return Err(ToolError::Config(format!(
            "pseudo tracks are [{pn}, {pf}] but predictions are [{n_q}, {frames}]",
        )));
    }
    let visibility = read_tensor_grid(&args.visibility, n_q, frames)?;
    let confidence = read_tensor_grid(&args.confidence, n_q, frames)?;

    let track = track_loss(&preds, &pseudo, &visibility, &confidence, &cfg)?;

    let flow = match (args.pred_flows.is_empty(), &args.pseudo_flow) {
        (true, None) => None,
        (false, Some(pseudo_path)) => {
            if args.pred_flows.len() != args.pred_tracks.len() {
                return Err(ToolError::Config(format!(
                    "{} flow iterations but {} track iterations",
                    args.pred_flows.len(),
                    args.pred_tracks.len(),
                )));
            }
            let mut flows = Vec::with_capacity(args.pred_flows.len());
            for p in &args.pred_flows {
                flows.push(read_flow_tensor(p)?);
            }
            let pseudo_flow = read_flow_tensor(pseudo_path)?;
            Some(flow_loss(&flows, &pseudo_flow, &cfg)?)
        }
        _ => {
            return Err(ToolError::Config(
                "flow supervision needs both --pred-flows and --pseudo-flow".into(),
            ));
        }
    };
    let attn = attention_term(args, cfg.huber_delta)?;
    let total = total_loss(track, flow.unwrap_or(0.0), cfg.lambda);

    let summary = serde_json::json!({
        "track": track,
        "flow": flow,
        "attn": attn,
        "total": total,
    });
    if let Some(p) = &args.out {
        write_json(p, &summary)?;
    }
    emit(&summary);
    Ok(())
}

/// Reads a [N_q, T] tensor into a flat row-major vector.
fn read_tensor_grid(path: &Path, n_q: u32, frames: u32) -> Result<Vec<f32>> {
    let (shape, data) = read_tensor(path)?;
    if shape != [n_q, frames] {
        return Err(ToolError::Config(format!(
            "{} must have shape [{n_q}, {frames}], found {shape:?}",
            path.display(),
        )));
    }
    Ok(data)
}
