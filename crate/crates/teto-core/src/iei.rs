//! Inter-event-interval statistics for comparing synthetic event
//! streams against real sensor recordings.

use alloc::vec;
use alloc::vec::Vec;

use crate::event::EventStream;
use crate::fmath;
use crate::{Error, Result};

/// Normalized inter-event-interval density over uniform bins.
#[derive(Debug, Clone, PartialEq)]
pub struct IeiHistogram {
    /// Number of uniform bins.
    pub bins: u32,
    /// Upper range in microseconds; intervals beyond it clip into the
    /// last bin.
    pub iei_max_us: i64,
    /// Density per bin; integrates to one over `[0, iei_max_us]`.
    pub density: Vec<f64>,
    /// Number of intervals the histogram was built from.
    pub total_samples: usize,
}

impl IeiHistogram {
    /// Width of one bin in microseconds.
    pub fn bin_width_us(&self) -> f64 {
        self.iei_max_us as f64 / f64::from(self.bins)
    }
}

/// Extracts per-pixel consecutive timestamp differences, polarity
/// agnostic. Pixels with fewer than two events contribute nothing;
/// output order follows stream order of the interval-closing event.
pub fn compute_iei(stream: &EventStream) -> Vec<i64> {
    let npix = stream.width() as usize * stream.height() as usize;
    let mut last_t = vec![i64::MIN; npix];
    let mut intervals = Vec::new();
    for e in stream.events() {
        let pix = e.y as usize * stream.width() as usize + e.x as usize;
        let prev = last_t[pix];
        if prev != i64::MIN {
            intervals.push(e.t_us - prev);
        }
        last_t[pix] = e.t_us;
    }
    intervals
}

/// 99.9th-percentile (nearest-rank) interval, used as the automatic
/// histogram range. Degenerate all-zero data falls back to one
/// microsecond so the bin width stays positive.
pub fn auto_range_us(intervals: &[i64]) -> Result<i64> {
    if intervals.is_empty() {
        return Err(Error::NoIntervals);
    }
    let mut sorted = intervals.to_vec();
    sorted.sort_unstable();
    let rank = (fmath::ceil(0.999 * sorted.len() as f64) as usize).clamp(1, sorted.len());
    Ok(sorted[rank - 1].max(1))
}

/// Bins `intervals` into `bins` uniform cells on `[0, iei_max_us]` and
/// normalizes counts by `total * bin_width` so the densities integrate
/// to one. `iei_max_us = None` selects [`auto_range_us`].
pub fn iei_histogram(intervals: &[i64], bins: u32, iei_max_us: Option<i64>) -> Result<IeiHistogram> {
    if bins == 0 {
        return Err(Error::InvalidConfig("histogram needs at least one bin"));
    }
    if intervals.is_empty() {
        return Err(Error::NoIntervals);
    }
    let iei_max_us = match iei_max_us {
        Some(v) if v >= 1 => v,
        Some(_) => return Err(Error::InvalidConfig("iei_max_us must be positive")),
        None => auto_range_us(intervals)?,
    };

    let mut counts = vec![0u64; bins as usize];
    let last = bins as u64 - 1;
    for &iv in intervals {
        let bin = if iv >= iei_max_us {
            last
        } else {
            // exact in u128: bin = floor(iv * bins / iei_max)
            (iv.max(0) as u128 * u128::from(bins) / iei_max_us as u128) as u64
        };
        counts[bin.min(last) as usize] += 1;
    }

    let bin_width = iei_max_us as f64 / f64::from(bins);
    let norm = 1.0 / (intervals.len() as f64 * bin_width);
    let density = counts.iter().map(|&n| n as f64 * norm).collect();
    Ok(IeiHistogram { bins, iei_max_us, density, total_samples: intervals.len() })
}

/// Side-by-side interval statistics of a real and a synthetic stream
/// over a shared histogram range.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamComparison {
    pub real: IeiHistogram,
    pub synth: IeiHistogram,
    pub real_mean_us: f64,
    pub synth_mean_us: f64,
    /// `synth_mean_us / real_mean_us`.
    pub mean_ratio: f64,
}

fn mean(intervals: &[i64]) -> f64 {
    intervals.iter().map(|&v| v as f64).sum::<f64>() / intervals.len() as f64
}

/// Compares interval densities of two streams. Both histograms share
/// one range: `iei_max_us` when given, otherwise the larger of the two
/// automatic ranges.
pub fn compare_streams(
    real: &EventStream,
    synth: &EventStream,
    bins: u32,
    iei_max_us: Option<i64>,
) -> Result<StreamComparison> {
    let real_iv = compute_iei(real);
    let synth_iv = compute_iei(synth);
    if real_iv.is_empty() {
        return Err(Error::NoIntervals);
    }
    if synth_iv.is_empty() {
        return Err(Error::NoIntervals);
    }
    let shared_max = match iei_max_us {
        Some(v) => v,
        None => auto_range_us(&real_iv)?.max(auto_range_us(&synth_iv)?),
    };
    let real_mean_us = mean(&real_iv);
    let synth_mean_us = mean(&synth_iv);
    Ok(StreamComparison {
        real: iei_histogram(&real_iv, bins, Some(shared_max))?,
        synth: iei_histogram(&synth_iv, bins, Some(shared_max))?,
        real_mean_us,
        synth_mean_us,
        mean_ratio: synth_mean_us / real_mean_us,
    })
}
