//! Tool-level errors and their process exit codes.

use std::io;
use std::path::{Path, PathBuf};

/// Anything a subcommand can fail with. Exit code 2 covers bad
/// inputs and configuration, 3 covers numerically degenerate data.
#[derive(Debug, thiserror::Error)]
pub enum ToolError {
    #[error(transparent)]
    Core(#[from] teto_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: invalid data at byte {offset}: {message}")]
    Parse { path: PathBuf, offset: u64, message: String },
    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, ToolError>;

impl ToolError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }

    pub fn parse(path: &Path, offset: u64, message: impl Into<String>) -> Self {
        Self::Parse { path: path.to_path_buf(), offset, message: message.into() }
    }

    /// Machine-readable error class for the stderr diagnostic line.
    pub fn code(&self) -> &'static str {
        use teto_core::Error as E;
        match self {
            Self::Io { .. } => "io",
            Self::Parse { .. } => "parse",
            Self::Config(_) => "config",
            Self::Core(e) => match e {
                E::OutOfBounds { .. } => "out-of-bounds",
                E::InvalidPolarity { .. } => "invalid-polarity",
                E::InvalidConfig(_) => "invalid-config",
                E::ShapeMismatch { .. } => "shape-mismatch",
                E::LengthMismatch { .. } => "length-mismatch",
                E::OutOfRange { .. } => "out-of-range",
                E::NoIntervals => "no-intervals",
                E::InsufficientSupport { .. } => "insufficient-support",
                E::DegenerateGeometry => "degenerate-geometry",
                E::NoEvaluableQueries => "no-evaluable-queries",
                E::EmptyAttentionRow => "empty-attention-row",
                E::NoVisibleFrames => "no-visible-frames",
                E::NonFinite { .. } => "non-finite",
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        use teto_core::Error as E;
        match self {
            Self::Io { .. } | Self::Parse { .. } | Self::Config(_) => 2,
            Self::Core(e) => match e {
                E::OutOfBounds { .. }
                | E::InvalidPolarity { .. }
                | E::InvalidConfig(_)
                | E::ShapeMismatch { .. }
                | E::LengthMismatch { .. }
                | E::OutOfRange { .. }
                | E::NoIntervals => 2,
                E::InsufficientSupport { .. }
                | E::DegenerateGeometry
                | E::NoEvaluableQueries
                | E::EmptyAttentionRow
                | E::NoVisibleFrames
                | E::NonFinite { .. } => 3,
            },
        }
    }
}
