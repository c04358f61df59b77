//! `teto warp`: backward warp by a flow field or temporal blend.

use std::path::{Path, PathBuf};

use teto_core::{Image, backward_warp, blend_bidirectional};

use crate::cmd::emit;
use crate::formats::flo::read_flo;
use crate::formats::tensor::{read_tensor, write_tensor};
use crate::{Result, ToolError};

#[derive(Debug, clap::Args)]
pub struct WarpArgs {
    /// Input image tensor of shape [H, W, C]
    #[arg(long)]
    pub image: PathBuf,
    /// Flow field in .flo layout giving each output pixel's sample offset
    #[arg(long)]
    pub flow: Option<PathBuf>,
    /// Second image tensor of shape [H, W, C] for temporal blending
    #[arg(long)]
    pub blend_with: Option<PathBuf>,
    /// Blend weight toward the second image, in [0, 1]
    #[arg(long)]
    pub t_norm: Option<f64>,
    /// Output tensor of shape [H, W, C]
    #[arg(long)]
    pub out: PathBuf,
}

/// Reads a [H, W, C] tensor as an image.
fn read_image(path: &Path) -> Result<Image> {
    let (shape, data) = read_tensor(path)?;
    let [height, width, channels] = shape[..] else {
        return Err(ToolError::Config(format!(
            "{} must have shape [H, W, C], found {shape:?}",
            path.display(),
        )));
    };
    Ok(Image::new(width, height, channels, data)?)
}

pub fn run(args: &WarpArgs) -> Result<()> {
    let image = read_image(&args.image)?;
    let shape = [image.height(), image.width(), image.channels()];

    let out = match (&args.flow, &args.blend_with, args.t_norm) {
        (Some(flow_path), None, None) => {
            log::info!("warp: image={}, flow={}", args.image.display(), flow_path.display());
            let flow = read_flo(flow_path)?;
            backward_warp(&image, &flow)?
        }
        (None, Some(other_path), Some(t_norm)) => {
            log::info!(
                "warp: blend image={} with={} t_norm={t_norm}",
                args.image.display(),
                other_path.display(),
            );
            let other = read_image(other_path)?;
            blend_bidirectional(&image, &other, t_norm)?
        }
        _ => {
            return Err(ToolError::Config(
                "use either --flow, or --blend-with together with --t-norm".into(),
            ));
        }
    };
    write_tensor(&args.out, &shape, out.data())?;
    emit(&serde_json::json!({
        "width": image.width(),
        "height": image.height(),
        "channels": image.channels(),
        "out": args.out.display().to_string(),
    }));
    Ok(())
}
