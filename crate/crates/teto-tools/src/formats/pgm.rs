//! Binary PGM (P5) masks, written as 0/255. The reader tolerates
//! comments and arbitrary header whitespace and treats any nonzero
//! sample as foreground.

use std::path::Path;

use teto_core::mask::BinaryMask;

use crate::error::{Result, ToolError};
use crate::formats::{read_bytes, write_bytes};

pub fn write_pgm(path: &Path, mask: &BinaryMask) -> Result<()> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(mask.bits().iter().map(|&b| if b { 255u8 } else { 0u8 }));
    write_bytes(path, &out)
}

pub fn read_pgm(path: &Path) -> Result<BinaryMask> {
    let bytes = read_bytes(path)?;
    let mut pos = 0usize;
    let err = |pos: usize, msg: &str| ToolError::parse(path, pos as u64, msg);

    let token = |pos: &mut usize| -> Result<String> {
        loop {
            match bytes.get(*pos) {
                Some(b'#') => {
                    while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                        *pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => *pos += 1,
                Some(_) => break,
                None => return Err(err(*pos, "truncated header")),
            }
        }
        let start = *pos;
        while bytes.get(*pos).is_some_and(|&b| !b.is_ascii_whitespace()) {
            *pos += 1;
        }
        String::from_utf8(bytes[start..*pos].to_vec())
            .map_err(|_| err(start, "header token is not ASCII"))
    };

    if token(&mut pos)? != "P5" {
        return Err(err(0, "expected binary PGM magic P5"));
    }
    let dim = |pos: &mut usize, what: &str| -> Result<u32> {
        let start = *pos;
        token(pos)?
            .parse::<u32>()
            .map_err(|_| err(start, &format!("bad {what}")))
    };
    let width = dim(&mut pos, "width")?;
    let height = dim(&mut pos, "height")?;
    let maxval = dim(&mut pos, "maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(err(pos, "maxval must be in 1..=255"));
    }
    // Exactly one whitespace byte separates the header from the
    // samples.
    if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(err(pos, "missing separator before samples"));
    }
    pos += 1;

    let cells = width as usize * height as usize;
    if bytes.len() - pos != cells {
        return Err(err(pos, &format!("expected {cells} samples, found {}", bytes.len() - pos)));
    }
    let bits = bytes[pos..].iter().map(|&b| b != 0).collect();
    Ok(BinaryMask::from_bits(width, height, bits)?)
}
