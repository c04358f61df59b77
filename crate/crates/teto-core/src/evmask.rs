//! Event motion masks built from raw activation maps, without any
//! learned component.

use crate::event::{Event, EventStream};
use crate::mask::BinaryMask;
use crate::{Error, Result};

/// Temporal window selection for motion-mask construction.
///
/// Count-based windows are the canonical two-scale construction; the
/// time-based variant drives the single-scale intersection form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskWindowConfig {
    CountBased {
        /// Events taken on each side of a frame time for the wide,
        /// noise-suppressing activation.
        n_wide: usize,
        /// Events closest to a frame time for the narrow, fast-motion
        /// activation.
        n_narrow: usize,
    },
    TimeBased {
        /// Long window extent in microseconds.
        delta_wide_us: i64,
        /// Short overlap extent in microseconds.
        delta_narrow_us: i64,
    },
}

impl Default for MaskWindowConfig {
    fn default() -> Self {
        Self::CountBased { n_wide: 10_000, n_narrow: 1_000 }
    }
}

impl MaskWindowConfig {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::CountBased { n_wide, n_narrow } => {
                if n_narrow > n_wide {
                    return Err(Error::InvalidConfig("n_narrow must not exceed n_wide"));
                }
            }
            Self::TimeBased { delta_wide_us, delta_narrow_us } => {
                if delta_narrow_us < 0 || delta_narrow_us >= delta_wide_us {
                    return Err(Error::InvalidConfig(
                        "time windows need 0 <= delta_narrow < delta_wide",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Marks every pixel where at least one event fired, regardless of
/// polarity. Events must be in bounds.
pub fn activation_map(events: &[Event], width: u32, height: u32) -> BinaryMask {
    let mut mask = BinaryMask::new(width, height);
    for e in events {
        mask.set(u32::from(e.x), u32::from(e.y), true);
    }
    mask
}

/// Intersection form: a pixel moves when it is active in both the
/// past and the future activation map.
pub fn event_motion_mask_simple(a_minus: &BinaryMask, a_plus: &BinaryMask) -> Result<BinaryMask> {
    a_minus.intersect(a_plus)
}

/// Activation of the `n` events on each side of `t_us` (up to `2n`
/// events total), the broad persistence evidence at one frame.
pub fn wide_activation(stream: &EventStream, t_us: i64, n: usize) -> BinaryMask {
    let mut mask = activation_map(stream.window_before(t_us, n), stream.width(), stream.height());
    for e in stream.window_after(t_us, n) {
        mask.set(u32::from(e.x), u32::from(e.y), true);
    }
    mask
}

/// Activation of the `n` events closest to `t_us`: `ceil(n/2)` at or
/// before it and `floor(n/2)` strictly after, each side clamped to
/// what the stream holds.
pub fn narrow_activation(stream: &EventStream, t_us: i64, n: usize) -> BinaryMask {
    let mut mask =
        activation_map(stream.window_before(t_us, n.div_ceil(2)), stream.width(), stream.height());
    for e in stream.window_after(t_us, n / 2) {
        mask.set(u32::from(e.x), u32::from(e.y), true);
    }
    mask
}

/// Two-scale event motion mask across a frame pair:
/// `(narrow_prev | narrow_cur) | (wide_prev & wide_cur)`.
///
/// Narrow activations catch fast motion near either frame boundary;
/// the wide intersection keeps persistently active regions while
/// dropping transient noise. Requires count-based windows.
pub fn event_motion_mask_two_scale(
    stream: &EventStream,
    t_prev_us: i64,
    t_cur_us: i64,
    cfg: &MaskWindowConfig,
) -> Result<BinaryMask> {
    cfg.validate()?;
    if t_prev_us > t_cur_us {
        return Err(Error::InvalidConfig("t_prev must not exceed t_cur"));
    }
    let MaskWindowConfig::CountBased { n_wide, n_narrow } = *cfg else {
        return Err(Error::InvalidConfig("two-scale masks use count-based windows"));
    };
    let narrow = narrow_activation(stream, t_prev_us, n_narrow)
        .union(&narrow_activation(stream, t_cur_us, n_narrow))?;
    let wide = wide_activation(stream, t_prev_us, n_wide)
        .intersect(&wide_activation(stream, t_cur_us, n_wide))?;
    narrow.union(&wide)
}

/// Single-scale mask at one frame time from asymmetric time windows:
/// the past map accumulates `[t - delta_wide, t + delta_narrow]`, the
/// future map `[t - delta_narrow, t + delta_wide]`, and the mask is
/// their intersection. Requires time-based windows.
pub fn event_motion_mask_single_scale(
    stream: &EventStream,
    t_us: i64,
    cfg: &MaskWindowConfig,
) -> Result<BinaryMask> {
    cfg.validate()?;
    let MaskWindowConfig::TimeBased { delta_wide_us, delta_narrow_us } = *cfg else {
        return Err(Error::InvalidConfig("single-scale masks use time-based windows"));
    };
    let a_minus = activation_map(
        stream.time_slice(t_us - delta_wide_us, t_us + delta_narrow_us),
        stream.width(),
        stream.height(),
    );
    let a_plus = activation_map(
        stream.time_slice(t_us - delta_narrow_us, t_us + delta_wide_us),
        stream.width(),
        stream.height(),
    );
    event_motion_mask_simple(&a_minus, &a_plus)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(x: u16, y: u16, t_us: i64) -> Event {
        Event { x, y, t_us, p: 1 }
    }

    fn stream(events: Vec<Event>) -> EventStream {
        EventStream::new(16, 16, events).unwrap()
    }

    #[test]
    fn activation_is_presence_not_accumulation() {
        assert_eq!(activation_map(&[], 8, 8).count_ones(), 0);

        let one = activation_map(&[ev(2, 3, 0)], 8, 8);
        assert_eq!(one.count_ones(), 1);
        assert!(one.get(2, 3));

        let canceling =
            activation_map(&[Event { x: 2, y: 3, t_us: 0, p: 1 }, Event { x: 2, y: 3, t_us: 1, p: -1 }], 8, 8);
        assert!(canceling.get(2, 3));
    }

    #[test]
    fn simple_mask_is_set_intersection() {
        let full = BinaryMask::filled(8, 8, true);
        let empty = BinaryMask::new(8, 8);
        assert_eq!(event_motion_mask_simple(&full, &empty).unwrap().count_ones(), 0);

        let mut a = BinaryMask::new(8, 8);
        a.set(1, 1, true);
        assert_eq!(event_motion_mask_simple(&a, &a).unwrap(), a);

        let mut b = BinaryMask::new(8, 8);
        b.set(2, 2, true);
        assert_eq!(event_motion_mask_simple(&a, &b).unwrap().count_ones(), 0);

        let other = BinaryMask::new(4, 4);
        assert!(event_motion_mask_simple(&a, &other).is_err());
    }

    #[test]
    fn narrow_window_splits_with_remainder_before() {
        let s = stream((1..=6).map(|t| ev(t as u16, 0, t)).collect());
        // n = 3 at t = 3: two events at or before (t=2,3), one after (t=4)
        let m = narrow_activation(&s, 3, 3);
        assert_eq!(m.count_ones(), 3);
        assert!(m.get(2, 0) && m.get(3, 0) && m.get(4, 0));
        assert!(!m.get(1, 0) && !m.get(5, 0));
    }

    #[test]
    fn pixel_active_in_every_window_is_kept() {
        let cfg = MaskWindowConfig::CountBased { n_wide: 4, n_narrow: 2 };
        let s = stream(vec![ev(1, 0, 90), ev(1, 0, 110), ev(1, 0, 190), ev(1, 0, 210)]);
        let m = event_motion_mask_two_scale(&s, 100, 200, &cfg).unwrap();
        assert_eq!(m.count_ones(), 1);
        assert!(m.get(1, 0));
    }

    #[test]
    fn two_scale_composition_and_terms() {
        let cfg = MaskWindowConfig::CountBased { n_wide: 2, n_narrow: 2 };
        // (1,0) fires around both frames; (9,0) only right at t_cur
        let s = stream(vec![
            ev(1, 0, 90),
            ev(1, 0, 110),
            ev(1, 0, 190),
            ev(1, 0, 210),
            ev(9, 0, 199),
            ev(9, 0, 201),
        ]);
        let m = event_motion_mask_two_scale(&s, 100, 200, &cfg).unwrap();
        assert!(m.get(1, 0));
        assert!(m.get(9, 0));

        // (9,0) is absent from the wide intersection, so only the
        // narrow union can have contributed it
        let wide_term =
            wide_activation(&s, 100, 2).intersect(&wide_activation(&s, 200, 2)).unwrap();
        assert!(wide_term.get(1, 0));
        assert!(!wide_term.get(9, 0));

        let oracle = narrow_activation(&s, 100, 2)
            .union(&narrow_activation(&s, 200, 2))
            .unwrap()
            .union(&wide_term)
            .unwrap();
        assert_eq!(m, oracle);

        let empty = stream(Vec::new());
        assert_eq!(event_motion_mask_two_scale(&empty, 0, 10, &cfg).unwrap().count_ones(), 0);
    }

    #[test]
    fn two_scale_validates_inputs() {
        let s = stream(Vec::new());
        let bad = MaskWindowConfig::CountBased { n_wide: 10, n_narrow: 20 };
        assert!(event_motion_mask_two_scale(&s, 0, 1, &bad).is_err());
        let cfg = MaskWindowConfig::default();
        assert!(event_motion_mask_two_scale(&s, 5, 1, &cfg).is_err());
        let time = MaskWindowConfig::TimeBased { delta_wide_us: 100, delta_narrow_us: 10 };
        assert!(event_motion_mask_two_scale(&s, 0, 1, &time).is_err());
    }

    #[test]
    fn single_scale_uses_asymmetric_time_windows() {
        let cfg = MaskWindowConfig::TimeBased { delta_wide_us: 100, delta_narrow_us: 10 };
        // (1,0) active on both sides of t=1000; (2,0) only in the past
        let s = stream(vec![ev(1, 0, 950), ev(1, 0, 1050), ev(2, 0, 920)]);
        let m = event_motion_mask_single_scale(&s, 1000, &cfg).unwrap();
        assert!(m.get(1, 0));
        assert!(!m.get(2, 0));

        // an event inside the +-delta_narrow overlap lights both maps
        let s = stream(vec![ev(3, 0, 1005)]);
        let m = event_motion_mask_single_scale(&s, 1000, &cfg).unwrap();
        assert!(m.get(3, 0));

        assert!(event_motion_mask_single_scale(&s, 0, &MaskWindowConfig::default()).is_err());
    }
}
