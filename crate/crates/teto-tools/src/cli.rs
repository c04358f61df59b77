//! Argument tree and process-level wiring for the `teto` binary.

use clap::{Parser, Subcommand};

use crate::cmd;

#[derive(Debug, Parser)]
#[command(
    name = "teto",
    version,
    about = "Event-stream motion toolkit: stacks, interval statistics, \
             flow decomposition, curation, masks, track scores and losses",
    after_help = "Set TETO_LOG=info (or debug, trace) for progress logging on stderr."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build multi-bin event stacks at reference timestamps
    Stack(cmd::stack::StackArgs),
    /// Histogram the per-pixel inter-event intervals of one stream
    Iei(cmd::iei::IeiArgs),
    /// Compare interval statistics of two streams on shared bins
    Compare(cmd::compare::CompareArgs),
    /// Fit a robust affine flow model and extract the residual motion mask
    Decompose(cmd::decompose::DecomposeArgs),
    /// Propose dense crops and assemble a curated training pool
    #[command(subcommand)]
    Curate(cmd::curate::CurateCommand),
    /// Draw query points from a mask with an object/uniform split
    Sample(cmd::sample::SampleArgs),
    /// Build event motion masks at frame timestamps
    Evmask(cmd::evmask::EvmaskArgs),
    /// Score tracked trajectories against object masks
    Oats(cmd::oats::OatsArgs),
    /// Evaluate distillation losses from prediction tensors
    Loss(cmd::loss::LossArgs),
    /// Warp an image by a flow field or blend two aligned images
    Warp(cmd::warp::WarpArgs),
}

impl Command {
    fn dispatch(&self) -> crate::Result<()> {
        match self {
            Command::Stack(args) => cmd::stack::run(args),
            Command::Iei(args) => cmd::iei::run(args),
            Command::Compare(args) => cmd::compare::run(args),
            Command::Decompose(args) => cmd::decompose::run(args),
            Command::Curate(cmd::curate::CurateCommand::Propose(args)) => {
                cmd::curate::run_propose(args)
            }
            Command::Curate(cmd::curate::CurateCommand::Build(args)) => cmd::curate::run_build(args),
            Command::Sample(args) => cmd::sample::run(args),
            Command::Evmask(args) => cmd::evmask::run(args),
            Command::Oats(args) => cmd::oats::run(args),
            Command::Loss(args) => cmd::loss::run(args),
            Command::Warp(args) => cmd::warp::run(args),
        }
    }
}

/// Parses arguments, runs the chosen command and maps failures onto the
/// exit-code contract: 0 success, 2 bad input or configuration, 3
/// degenerate or non-finite numerics. A failure also prints one JSON
/// diagnostic line on stderr.
pub fn run() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter("TETO_LOG"))
        .format_timestamp(None)
        .try_init();
    let cli = Cli::parse();
    match cli.command.dispatch() {
        Ok(()) => 0,
        Err(err) => {
            let exit = err.exit_code();
            let diagnostic = serde_json::json!({
                "error": err.code(),
                "message": err.to_string(),
                "exit": exit,
            });
            eprintln!("{diagnostic}");
            exit
        }
    }
}
