//! One module per `teto` subcommand. Each exposes a clap `Args` struct
//! and a `run` function returning [`crate::Result`].

pub mod compare;
pub mod curate;
pub mod decompose;
pub mod evmask;
pub mod iei;
pub mod loss;
pub mod oats;
pub mod sample;
pub mod stack;
pub mod warp;

use std::path::Path;

use serde::de::DeserializeOwned;

use crate::Result;

/// Reads an optional JSON config file. Flags given on the command line
/// take precedence over file values, which take precedence over the
/// built-in defaults; each command applies that order itself.
pub(crate) fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        Some(p) => crate::formats::read_json(p),
        None => Ok(T::default()),
    }
}

/// Emits the machine-readable result line every command prints on success.
pub(crate) fn emit(value: &serde_json::Value) {
    println!("{value}");
}
