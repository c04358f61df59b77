//! On-disk interchange formats. All multi-byte encodings are
//! little-endian; every reader reports the byte offset of the first
//! offending value.

pub mod affine;
pub mod events;
pub mod flo;
pub mod masks;
pub mod pgm;
pub mod pool;
pub mod stack;
pub mod tensor;
pub mod tracks;

use std::fs;
use std::path::Path;

use crate::error::{Result, ToolError};

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| ToolError::io(path, e))
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| ToolError::io(path, e))
}

/// Little-endian decoder that tracks its position for diagnostics.
pub(crate) struct ByteReader<'a> {
    path: &'a Path,
    buf: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub fn new(path: &'a Path, buf: &'a [u8]) -> Self {
        Self { path, buf, pos: 0 }
    }

    pub fn offset(&self) -> u64 {
        self.pos as u64
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn error(&self, message: impl Into<String>) -> ToolError {
        ToolError::parse(self.path, self.offset(), message)
    }

    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let Some(slice) = self.buf.get(self.pos..self.pos + N) else {
            return Err(self.error(format!("truncated while reading {what}")));
        };
        self.pos += N;
        Ok(slice.try_into().unwrap())
    }

    pub fn magic(&mut self, expected: &[u8; 8]) -> Result<()> {
        let got: [u8; 8] = self.take("magic")?;
        if &got != expected {
            self.pos = 0;
            return Err(self.error(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(&got),
                String::from_utf8_lossy(expected),
            )));
        }
        Ok(())
    }

    pub fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(what)?))
    }

    pub fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(what)?))
    }

    pub fn i32(&mut self, what: &str) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take(what)?))
    }

    pub fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(what)?))
    }

    pub fn i64(&mut self, what: &str) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(what)?))
    }

    pub fn i8(&mut self, what: &str) -> Result<i8> {
        Ok(i8::from_le_bytes(self.take(what)?))
    }

    pub fn f32(&mut self, what: &str) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(what)?))
    }
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|e| {
        ToolError::parse(path, e.column().saturating_sub(1) as u64, e.to_string())
    })
}

pub(crate) fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| ToolError::Config(e.to_string()))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}
