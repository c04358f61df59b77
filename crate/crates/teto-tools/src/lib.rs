//! File formats and batch command-line front end for [`teto_core`].
//!
//! The core crate owns the algorithms; this crate owns everything that
//! touches an operating system: binary and text codecs for event streams,
//! flow fields, masks, track sets and tensors, plus the `teto` binary
//! that wires them to the core entry points.

pub mod cli;
pub mod cmd;
pub mod error;
pub mod formats;

pub use error::{Result, ToolError};
