//! Event records, validated streams, and multi-bin event stacks.

use alloc::vec::Vec;

use crate::grid::PolarityMap;
use crate::{Error, Result};

/// One sensor brightness-change record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    /// Pixel column.
    pub x: u16,
    /// Pixel row.
    pub y: u16,
    /// Timestamp in microseconds.
    pub t_us: i64,
    /// Polarity, -1 or +1.
    pub p: i8,
}

/// A time-sorted event sequence with its sensor geometry.
///
/// Construction validates bounds and polarities and stably sorts by
/// timestamp, so equal timestamps keep their input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventStream {
    width: u32,
    height: u32,
    events: Vec<Event>,
}

impl EventStream {
    pub fn new(width: u32, height: u32, mut events: Vec<Event>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidConfig("sensor dimensions must be positive"));
        }
        for (index, e) in events.iter().enumerate() {
            if u32::from(e.x) >= width || u32::from(e.y) >= height {
                return Err(Error::OutOfBounds { index, x: e.x, y: e.y, width, height });
            }
            if e.p != -1 && e.p != 1 {
                return Err(Error::InvalidPolarity { index, value: e.p });
            }
        }
        events.sort_by_key(|e| e.t_us);
        Ok(Self { width, height, events })
    }

    pub fn empty(width: u32, height: u32) -> Result<Self> {
        Self::new(width, height, Vec::new())
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Index of the first event with timestamp strictly greater than
    /// `t_us`; events before this index form the closed-right past.
    pub fn split_at_time(&self, t_us: i64) -> usize {
        self.events.partition_point(|e| e.t_us <= t_us)
    }

    /// The up-to-`n` events with the largest timestamps `<= t_us`, in
    /// time order.
    pub fn window_before(&self, t_us: i64, n: usize) -> &[Event] {
        let end = self.split_at_time(t_us);
        &self.events[end - n.min(end)..end]
    }

    /// The up-to-`n` events with the smallest timestamps `> t_us`, in
    /// time order.
    pub fn window_after(&self, t_us: i64, n: usize) -> &[Event] {
        let start = self.split_at_time(t_us);
        let end = (start + n).min(self.events.len());
        &self.events[start..end]
    }

    pub fn window_by_count(&self, t_us: i64, n: usize, side: WindowSide) -> &[Event] {
        match side {
            WindowSide::Before => self.window_before(t_us, n),
            WindowSide::After => self.window_after(t_us, n),
        }
    }

    /// All events with `from_us <= t <= to_us`, in time order.
    pub fn time_slice(&self, from_us: i64, to_us: i64) -> &[Event] {
        let start = self.events.partition_point(|e| e.t_us < from_us);
        let end = self.events.partition_point(|e| e.t_us <= to_us);
        &self.events[start..end.max(start)]
    }
}

/// Which side of a query timestamp a count window is taken from.
/// Events at exactly the query timestamp count as `Before`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowSide {
    Before,
    After,
}

/// Event-stack shape parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StackConfig {
    /// Total event count per timestamp (the deepest bin's quota).
    pub num_events: u64,
    /// Number of temporal bins.
    pub bins: u32,
}

impl Default for StackConfig {
    fn default() -> Self {
        Self { num_events: 300_000, bins: 10 }
    }
}

impl StackConfig {
    pub fn new(num_events: u64, bins: u32) -> Result<Self> {
        if num_events == 0 {
            return Err(Error::InvalidConfig("num_events must be at least 1"));
        }
        if bins == 0 {
            return Err(Error::InvalidConfig("bins must be at least 1"));
        }
        Ok(Self { num_events, bins })
    }

    /// Event quota of bin `bin_index` (0-based):
    /// `max(1, floor(num_events / 2^(bins - 1 - bin_index)))`.
    pub fn bin_quota(&self, bin_index: u32) -> u64 {
        debug_assert!(bin_index < self.bins);
        let shift = self.bins - 1 - bin_index;
        let divided = if shift < 64 { self.num_events >> shift } else { 0 };
        divided.max(1)
    }

    /// True when the shallowest bins bottom out at the minimum quota
    /// of one event, i.e. `num_events < 2^(bins - 1)`.
    pub fn quota_clamped(&self) -> bool {
        let shift = self.bins - 1;
        if shift < 64 { self.num_events < (1 << shift) } else { true }
    }
}

/// Multi-bin polarity accumulation at a reference timestamp.
///
/// Bin planes are stored plane-major: plane `b` holds the row-major
/// accumulation of the `counts[b]` most recent events at `t_ref_us`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventStack {
    width: u32,
    height: u32,
    bins: u32,
    t_ref_us: i64,
    counts: Vec<u64>,
    data: Vec<i32>,
}

impl EventStack {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bins(&self) -> u32 {
        self.bins
    }

    pub fn t_ref_us(&self) -> i64 {
        self.t_ref_us
    }

    /// Realized event count per bin, shallowest first.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Row-major accumulation plane of one bin.
    pub fn plane(&self, bin_index: u32) -> &[i32] {
        let plane_len = self.width as usize * self.height as usize;
        let start = bin_index as usize * plane_len;
        &self.data[start..start + plane_len]
    }

    pub fn value(&self, x: u32, y: u32, bin_index: u32) -> i32 {
        self.plane(bin_index)[y as usize * self.width as usize + x as usize]
    }
}

/// Builds the event stack at `t_us`: bin `b` accumulates the polarity
/// of the `min(quota(b), available)` most recent events with timestamp
/// `<= t_us`. An empty window yields an all-zero stack.
pub fn build_event_stack(stream: &EventStream, t_us: i64, cfg: &StackConfig) -> EventStack {
    let width = stream.width();
    let height = stream.height();
    let plane_len = width as usize * height as usize;
    let end = stream.split_at_time(t_us);

    let mut counts = Vec::with_capacity(cfg.bins as usize);
    let mut data = alloc::vec![0i32; plane_len * cfg.bins as usize];
    for bin_index in 0..cfg.bins {
        let quota = cfg.bin_quota(bin_index);
        let used = (quota.min(end as u64)) as usize;
        counts.push(used as u64);
        let plane = &mut data[bin_index as usize * plane_len..(bin_index as usize + 1) * plane_len];
        accumulate_into(&stream.events()[end - used..end], width, plane);
    }

    EventStack { width, height, bins: cfg.bins, t_ref_us: t_us, counts, data }
}

fn accumulate_into(events: &[Event], width: u32, plane: &mut [i32]) {
    for e in events {
        plane[e.y as usize * width as usize + e.x as usize] += i32::from(e.p);
    }
}

/// Sums event polarities per pixel. Events must be in bounds.
pub fn accumulate_polarity(events: &[Event], width: u32, height: u32) -> PolarityMap {
    let mut map = PolarityMap::new(width, height);
    accumulate_into(events, width, map.as_mut_slice());
    map
}

/// One cell of the patch-density grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchDensity {
    /// Patch row in the grid.
    pub row: u32,
    /// Patch column in the grid.
    pub col: u32,
    /// Events inside the patch.
    pub count: u64,
}

/// Divides the frame into a grid of `patch`-sized cells (edge cells may
/// be partial) and returns the `k` cells with the most events, highest
/// first. Ties go to the smaller row-major cell index; empty cells are
/// never returned, so fewer than `k` active cells shortens the list.
pub fn event_density_topk(
    events: &[Event],
    width: u32,
    height: u32,
    patch: u32,
    k: usize,
) -> Vec<PatchDensity> {
    debug_assert!(patch >= 1);
    let cols = width.div_ceil(patch);
    let rows = height.div_ceil(patch);
    let mut counts = alloc::vec![0u64; cols as usize * rows as usize];
    for e in events {
        let cell = (u32::from(e.y) / patch) as usize * cols as usize + (u32::from(e.x) / patch) as usize;
        counts[cell] += 1;
    }

    let mut order: Vec<usize> = (0..counts.len()).filter(|&i| counts[i] > 0).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    order
        .into_iter()
        .take(k)
        .map(|i| PatchDensity {
            row: (i / cols as usize) as u32,
            col: (i % cols as usize) as u32,
            count: counts[i],
        })
        .collect()
}
