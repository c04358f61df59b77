//! Order statistics used by the robust fitting and interval modules.

use alloc::vec::Vec;

/// Consistency constant that rescales the median absolute deviation to
/// estimate a Gaussian standard deviation.
pub const MAD_SCALE: f64 = 1.4826;

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

/// Median of `values`; an even count averages the two middle elements.
/// Returns `None` for an empty slice.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let v = sorted(values);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[mid] } else { (v[mid - 1] + v[mid]) / 2.0 })
}

/// Median absolute deviation from the median.
pub fn mad(values: &[f64]) -> Option<f64> {
    let m = median(values)?;
    let dev: Vec<f64> = values.iter().map(|v| (v - m).abs()).collect();
    median(&dev)
}

/// Robust outlier threshold `median + k_mad * 1.4826 * MAD`.
pub fn robust_threshold(values: &[f64], k_mad: f64) -> Option<f64> {
    Some(median(values)? + k_mad * MAD_SCALE * mad(values)?)
}
