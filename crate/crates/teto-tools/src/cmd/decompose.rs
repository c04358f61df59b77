//! `teto decompose`: robust affine fit plus residual object-motion mask.

use std::path::PathBuf;

use serde::Deserialize;
use teto_core::{CleanupConfig, FlowField, RansacConfig, decompose_flow};

use crate::cmd::{emit, load_config};
use crate::formats::affine::write_affine;
use crate::formats::flo::read_flo;
use crate::formats::pgm::write_pgm;
use crate::formats::tensor::{read_tensor_shaped, write_tensor};
use crate::{Result, ToolError};

#[derive(Debug, clap::Args)]
pub struct DecomposeArgs {
    /// Dense flow field in .flo layout
    #[arg(long)]
    pub flow: PathBuf,
    /// Optional visibility tensor of shape [H, W] with values in [0, 1]
    #[arg(long)]
    pub visibility: Option<PathBuf>,
    /// Optional confidence tensor of shape [H, W] with values in [0, 1]
    #[arg(long)]
    pub confidence: Option<PathBuf>,
    /// Seed for sample subselection and consensus draws
    #[arg(long)]
    pub seed: u64,
    /// Inlier reprojection threshold in pixels (default: 2)
    #[arg(long)]
    pub reproj_threshold: Option<f64>,
    /// Consensus iterations (default: 500)
    #[arg(long)]
    pub iterations: Option<u32>,
    /// Fraction of pass-one support dropped before the final refit (default: 0.2)
    #[arg(long)]
    pub discard: Option<f64>,
    /// Minimum flow magnitude a sample must carry (default: 0.5)
    #[arg(long)]
    pub min_flow_mag: Option<f64>,
    /// Visibility cut for valid samples (default: 0.5)
    #[arg(long)]
    pub vis_min: Option<f64>,
    /// Confidence cut for valid samples (default: 0.3)
    #[arg(long)]
    pub conf_min: Option<f64>,
    /// Cap on samples entering the fit (default: 20000)
    #[arg(long)]
    pub max_points: Option<usize>,
    /// Residual threshold in scaled absolute deviations above the median (default: 4)
    #[arg(long)]
    pub k_mad: Option<f64>,
    /// Opening kernel edge for mask cleanup (default: 3)
    #[arg(long)]
    pub open_kernel: Option<u32>,
    /// Closing kernel edge for mask cleanup (default: 7)
    #[arg(long)]
    pub close_kernel: Option<u32>,
    /// Smallest surviving connected component in pixels (default: 200)
    #[arg(long)]
    pub min_component: Option<usize>,
    /// Affine model JSON output
    #[arg(long)]
    pub out_affine: PathBuf,
    /// Cleaned object-motion mask PGM output
    #[arg(long)]
    pub out_mask: PathBuf,
    /// Optional ungated threshold mask PGM output
    #[arg(long)]
    pub out_raw_mask: Option<PathBuf>,
    /// Optional residual magnitude tensor of shape [H, W]
    #[arg(long)]
    pub out_residual: Option<PathBuf>,
    /// JSON config file; command-line flags override its keys
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecomposeFileConfig {
    reproj_threshold: Option<f64>,
    iterations: Option<u32>,
    discard: Option<f64>,
    min_flow_mag: Option<f64>,
    vis_min: Option<f64>,
    conf_min: Option<f64>,
    max_points: Option<usize>,
    k_mad: Option<f64>,
    open_kernel: Option<u32>,
    close_kernel: Option<u32>,
    min_component: Option<usize>,
}

fn grid(path: &PathBuf, width: u32, height: u32, what: &str) -> Result<Vec<f32>> {
    let data = read_tensor_shaped(path, &[height, width])?;
    if data.iter().any(|v| !v.is_finite()) {
        return Err(ToolError::Config(format!("{what} tensor contains non-finite values")));
    }
    Ok(data)
}

pub fn run(args: &DecomposeArgs) -> Result<()> {
    let file: DecomposeFileConfig = load_config(args.config.as_deref())?;
    let defaults = RansacConfig::default();
    let ransac = RansacConfig {
        reproj_threshold: args
            .reproj_threshold
            .or(file.reproj_threshold)
            .unwrap_or(defaults.reproj_threshold),
        iterations: args.iterations.or(file.iterations).unwrap_or(defaults.iterations),
        second_pass_discard: args
            .discard
            .or(file.discard)
            .unwrap_or(defaults.second_pass_discard),
        min_flow_mag: args.min_flow_mag.or(file.min_flow_mag).unwrap_or(defaults.min_flow_mag),
        vis_min: args.vis_min.or(file.vis_min).unwrap_or(defaults.vis_min),
        conf_min: args.conf_min.or(file.conf_min).unwrap_or(defaults.conf_min),
        max_points: args.max_points.or(file.max_points).unwrap_or(defaults.max_points),
        seed: args.seed,
    };
    let k_mad = args.k_mad.or(file.k_mad).unwrap_or(4.0);
    let cleanup = CleanupConfig {
        open_kernel: args.open_kernel.or(file.open_kernel).unwrap_or(3),
        close_kernel: args.close_kernel.or(file.close_kernel).unwrap_or(7),
        min_component: args.min_component.or(file.min_component).unwrap_or(200),
    };
    log::info!("decompose: flow={}, seed={}, k_mad={k_mad}", args.flow.display(), args.seed);

    let base = read_flo(&args.flow)?;
    let (width, height) = (base.width(), base.height());
    let field = if args.visibility.is_some() || args.confidence.is_some() {
        let visibility = match &args.visibility {
            Some(p) => Some(grid(p, width, height, "visibility")?),
            None => None,
        };
        let confidence = match &args.confidence {
            Some(p) => Some(grid(p, width, height, "confidence")?),
            None => None,
        };
        FlowField::new(width, height, base.u().to_vec(), base.v().to_vec(), visibility, confidence)?
    } else {
        base
    };
    let result = decompose_flow(&field, &ransac, k_mad, &cleanup)?;

    write_affine(&args.out_affine, &result.model)?;
    write_pgm(&args.out_mask, &result.mask)?;
    if let Some(p) = &args.out_raw_mask {
        write_pgm(p, &result.raw_mask)?;
    }
    if let Some(p) = &args.out_residual {
        write_tensor(p, &[height, width], result.residual.as_slice())?;
    }
    emit(&serde_json::json!({
        "translation": [result.model.a[0][2], result.model.a[1][2]],
        "mask_area_ratio": result.mask.area_ratio(),
        "raw_mask_area_ratio": result.raw_mask.area_ratio(),
    }));
    Ok(())
}
