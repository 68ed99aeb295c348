use core::fmt;

/// Everything that can go wrong in the core crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A NaN reached a constructor that only accepts ordered values.
    NotANumber(&'static str),
    /// A value outside its documented domain.
    OutOfRange { what: &'static str, value: f64 },
    /// Field width or height of zero.
    EmptyDimensions { width: usize, height: usize },
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    /// A window query that clipped down to nothing.
    EmptyWindow,
    /// Sample times must be strictly increasing.
    NonIncreasingTime { last: f64, next: f64 },
    /// A track has not collected enough samples to define `tau`.
    TauUndefined { samples: usize },
    ColumnOutOfRange { column: usize, width: usize },
    PixelOutOfRange { x: usize, y: usize },
    InvalidScenario(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotANumber(what) => write!(f, "{what} must not be NaN"),
            Error::OutOfRange { what, value } => write!(f, "{what} out of range: {value}"),
            Error::EmptyDimensions { width, height } => {
                write!(f, "field dimensions must be positive, got {width}x{height}")
            }
            Error::DimensionMismatch { expected, found } => write!(
                f,
                "dimension mismatch: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::EmptyWindow => write!(f, "window is empty after clipping"),
            Error::NonIncreasingTime { last, next } => {
                write!(f, "sample time {next} does not follow {last}")
            }
            Error::TauUndefined { samples } => {
                write!(f, "time-to-contact undefined with {samples} sample(s)")
            }
            Error::ColumnOutOfRange { column, width } => {
                write!(f, "column {column} outside image of width {width}")
            }
            Error::PixelOutOfRange { x, y } => write!(f, "pixel ({x}, {y}) outside image"),
            Error::InvalidScenario(why) => write!(f, "invalid scenario: {why}"),
        }
    }
}

impl core::error::Error for Error {}
