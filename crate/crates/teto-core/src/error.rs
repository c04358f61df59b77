//! Error type shared by all core modules.

use thiserror::Error;

/// Failure cases surfaced by core operations.
///
/// Degenerate *data* (an empty event window, an all-background mask)
/// is generally a valid result and is not reported here; errors are
/// reserved for inputs that violate a documented precondition or for
/// computations with no defined outcome.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An event coordinate lies outside the sensor frame.
    #[error("event {index} at ({x}, {y}) outside {width}x{height} frame")]
    OutOfBounds { index: usize, x: u16, y: u16, width: u32, height: u32 },

    /// An event polarity is not -1 or +1.
    #[error("event {index} has invalid polarity {value}, expected -1 or +1")]
    InvalidPolarity { index: usize, value: i8 },

    /// A configuration value violates its documented range.
    #[error("invalid config: {0}")]
    InvalidConfig(&'static str),

    /// Two buffers that must share dimensions do not.
    #[error("shape mismatch: {expected_width}x{expected_height} vs {actual_width}x{actual_height}")]
    ShapeMismatch {
        expected_width: u32,
        expected_height: u32,
        actual_width: u32,
        actual_height: u32,
    },

    /// A buffer length does not match its declared dimensions.
    #[error("length mismatch: expected {expected} elements, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    /// Too few samples survived filtering to fit a model.
    #[error("insufficient support: {found} samples, need at least {needed}")]
    InsufficientSupport { found: usize, needed: usize },

    /// No non-degenerate minimal sample was found while fitting.
    #[error("degenerate geometry: no valid model candidate found")]
    DegenerateGeometry,

    /// Interval statistics were requested for a stream with no pixel
    /// that fired twice.
    #[error("no inter-event intervals in stream")]
    NoIntervals,

    /// No query could be assigned to an object for evaluation.
    #[error("no evaluable queries")]
    NoEvaluableQueries,

    /// An attention row sums to zero, so no expectation exists.
    #[error("attention row has no positive mass")]
    EmptyAttentionRow,

    /// A loss term was asked to average over zero visible frames.
    #[error("no visible frames to supervise")]
    NoVisibleFrames,

    /// A numeric input that must be finite is NaN or infinite.
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    /// A bounded quantity (probability, ratio) lies outside its range.
    #[error("value out of range in {what}")]
    OutOfRange { what: &'static str },
}
