//! Affinely extended reals: the finite reals plus `+inf` and `-inf`, totally
//! ordered. NaN is rejected at construction so that ordering never fails.

use core::cmp::Ordering;
use core::fmt;

use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Default)]
pub struct ExtendedReal(f64);

impl ExtendedReal {
    pub const INFINITY: Self = Self(f64::INFINITY);
    pub const NEG_INFINITY: Self = Self(f64::NEG_INFINITY);
    pub const ZERO: Self = Self(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() {
            Err(Error::NotANumber("extended real"))
        } else {
            Ok(Self(value))
        }
    }

    /// Panics on NaN. Meant for literals and values already known to be ordered.
    pub fn from_f64(value: f64) -> Self {
        Self::new(value).expect("NaN is not an extended real")
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_pos_infinity(self) -> bool {
        self.0 == f64::INFINITY
    }
}

// NaN can never be stored, so the partial order is total.
impl Eq for ExtendedReal {}

impl Ord for ExtendedReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.partial_cmp(&other.0).unwrap_or(Ordering::Equal)
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == f64::INFINITY {
            f.write_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            f.write_str("-inf")
        } else {
            fmt::Display::fmt(&self.0, f)
        }
    }
}

impl TryFrom<f64> for ExtendedReal {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<ExtendedReal> for f64 {
    fn from(value: ExtendedReal) -> f64 {
        value.0
    }
}
