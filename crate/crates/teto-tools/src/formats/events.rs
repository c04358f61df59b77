//! Event stream files: the TETOEVT1 binary layout and a CSV fallback.
//!
//! Binary layout: magic `TETOEVT1`, u32 width, u32 height, u64 count,
//! then `count` records of `{u16 x, u16 y, i64 t_us, i8 p}`.

use std::path::Path;

use teto_core::event::{Event, EventStream};

use crate::error::{Result, ToolError};
use crate::formats::{read_bytes, write_bytes, ByteReader};

pub const EVENT_MAGIC: &[u8; 8] = b"TETOEVT1";

const RECORD_BYTES: usize = 2 + 2 + 8 + 1;

pub fn write_events(path: &Path, stream: &EventStream) -> Result<()> {
    let mut out = Vec::with_capacity(24 + stream.len() * RECORD_BYTES);
    out.extend_from_slice(EVENT_MAGIC);
    out.extend_from_slice(&stream.width().to_le_bytes());
    out.extend_from_slice(&stream.height().to_le_bytes());
    out.extend_from_slice(&(stream.len() as u64).to_le_bytes());
    for e in stream.events() {
        out.extend_from_slice(&e.x.to_le_bytes());
        out.extend_from_slice(&e.y.to_le_bytes());
        out.extend_from_slice(&e.t_us.to_le_bytes());
        out.extend_from_slice(&e.p.to_le_bytes());
    }
    write_bytes(path, &out)
}

pub fn read_events(path: &Path) -> Result<EventStream> {
    let bytes = read_bytes(path)?;
    let mut r = ByteReader::new(path, &bytes);
    r.magic(EVENT_MAGIC)?;
    let width = r.u32("width")?;
    let height = r.u32("height")?;
    let count = r.u64("count")?;
    let expected = count as usize * RECORD_BYTES;
    if r.remaining() != expected {
        return Err(r.error(format!(
            "payload holds {} bytes, header promises {count} records ({expected} bytes)",
            r.remaining(),
        )));
    }
    let mut events = Vec::with_capacity(count as usize);
    for _ in 0..count {
        events.push(Event {
            x: r.u16("x")?,
            y: r.u16("y")?,
            t_us: r.i64("t_us")?,
            p: r.i8("p")?,
        });
    }
    Ok(EventStream::new(width, height, events)?)
}

pub fn write_events_csv(path: &Path, stream: &EventStream) -> Result<()> {
    let mut out = String::from("x,y,t_us,p\n");
    for e in stream.events() {
        out.push_str(&format!("{},{},{},{}\n", e.x, e.y, e.t_us, e.p));
    }
    write_bytes(path, out.as_bytes())
}

/// Reads the CSV fallback. Width and height are not part of the CSV,
/// so the frame is sized to the events' coordinate extent unless
/// given.
pub fn read_events_csv(path: &Path, size: Option<(u32, u32)>) -> Result<EventStream> {
    let bytes = read_bytes(path)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| ToolError::parse(path, e.valid_up_to() as u64, "not valid UTF-8"))?;

    let mut offset = 0u64;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header.trim() != "x,y,t_us,p" {
        return Err(ToolError::parse(path, 0, "expected header line \"x,y,t_us,p\""));
    }
    offset += header.len() as u64 + 1;

    let mut events = Vec::new();
    for line in lines {
        let line_start = offset;
        offset += line.len() as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(ToolError::parse(path, line_start, format!("expected 4 fields, got {}", fields.len())));
        }
        let field = |i: usize, what: &str| -> Result<i64> {
            fields[i]
                .parse::<i64>()
                .map_err(|_| ToolError::parse(path, line_start, format!("bad {what} value {:?}", fields[i])))
        };
        let (x, y, t_us, p) = (field(0, "x")?, field(1, "y")?, field(2, "t_us")?, field(3, "p")?);
        if !(0..=i64::from(u16::MAX)).contains(&x) || !(0..=i64::from(u16::MAX)).contains(&y) {
            return Err(ToolError::parse(path, line_start, "coordinate outside u16 range"));
        }
        if !(-128..=127).contains(&p) {
            return Err(ToolError::parse(path, line_start, "polarity outside i8 range"));
        }
        events.push(Event { x: x as u16, y: y as u16, t_us, p: p as i8 });
    }

    let (width, height) = size.unwrap_or_else(|| {
        (
            events.iter().map(|e| u32::from(e.x) + 1).max().unwrap_or(1),
            events.iter().map(|e| u32::from(e.y) + 1).max().unwrap_or(1),
        )
    });
    Ok(EventStream::new(width, height, events)?)
}

/// Dispatches on the file extension: `.csv` reads the text fallback,
/// anything else the binary layout.
pub fn load_events(path: &Path) -> Result<EventStream> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        read_events_csv(path, None)
    } else {
        read_events(path)
    }
}
