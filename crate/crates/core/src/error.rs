use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pixel ({row}, {col}) is outside the {rows}x{cols} grid")]
    OutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid stimulus: {0}")]
    InvalidStimulus(String),
    #[error("negative pressure {0}")]
    NegativePressure(f64),
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("unit mismatch: expected {expected:?}, got {got:?}")]
    UnitMismatch {
        expected: crate::frame::Unit,
        got: crate::frame::Unit,
    },
    #[error("invalid samples: {0}")]
    InvalidSamples(String),
    #[error("negative curvature {0}")]
    NegativeCurvature(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("expected {expected} frames, got {got}")]
    FrameCount { expected: usize, got: usize },
    #[error("negative reading {value} at index {index}")]
    NegativeReading { index: usize, value: f64 },
    #[error("crosstalk undefined: stimulated reading is {0}")]
    UndefinedMetric(f64),
    #[error("crosstalk needs at least one neighbour")]
    EmptyNeighborhood,
    #[error("frame of {rows}x{cols} does not fit the wire format (max 255x255)")]
    WireDimensions { rows: usize, cols: usize },
}
