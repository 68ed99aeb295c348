//! The fixed-size field grid and its min-`tau` composition algebra.

use alloc::vec;
use alloc::vec::Vec;
use core::borrow::Borrow;
use core::mem;

use crate::{Error, ExtendedReal, Result};

/// One field cell: time-to-contact and its time derivative.
///
/// Field order is significant: the derived ordering is lexicographic on
/// `(tau, tau_dot)`, which is exactly the min-`tau` selection rule with ties
/// going to the faster-closing (smaller `tau_dot`) tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PotentialTuple {
    tau: ExtendedReal,
    tau_dot: ExtendedReal,
}

impl PotentialTuple {
    /// `<+inf, +inf>`: nothing observed at this pixel. Identity of [`min_tau`].
    pub const BACKGROUND: Self = Self {
        tau: ExtendedReal::INFINITY,
        tau_dot: ExtendedReal::INFINITY,
    };

    pub fn new(tau: f64, tau_dot: f64) -> Result<Self> {
        Self::from_extended(ExtendedReal::new(tau)?, ExtendedReal::new(tau_dot)?)
    }

    /// `tau` must be non-negative; a negative time-to-contact is never stored.
    pub fn from_extended(tau: ExtendedReal, tau_dot: ExtendedReal) -> Result<Self> {
        if tau < ExtendedReal::ZERO {
            return Err(Error::OutOfRange {
                what: "tau",
                value: tau.get(),
            });
        }
        Ok(Self { tau, tau_dot })
    }

    pub fn tau(&self) -> ExtendedReal {
        self.tau
    }

    pub fn tau_dot(&self) -> ExtendedReal {
        self.tau_dot
    }

    pub fn is_background(&self) -> bool {
        *self == Self::BACKGROUND
    }
}

impl Default for PotentialTuple {
    fn default() -> Self {
        Self::BACKGROUND
    }
}

/// Selects the tuple with the smaller `tau`; equal `tau` goes to the smaller
/// `tau_dot`. Always returns one of its arguments unchanged.
#[inline(always)]
pub fn min_tau(a: PotentialTuple, b: PotentialTuple) -> PotentialTuple {
    // Same order as `b < a`, written without short-circuiting so the
    // selection compiles to a branch-free blend.
    let (at, bt) = (a.tau.get(), b.tau.get());
    let take_b = (bt < at) | ((bt == at) & (b.tau_dot.get() < a.tau_dot.get()));
    if take_b {
        b
    } else {
        a
    }
}

/// Inclusive pixel rectangle. Coordinates are signed so that projections
/// hanging off the image can be represented before clipping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RegionOfInterest {
    pub x_min: i64,
    pub y_min: i64,
    pub x_max: i64,
    pub y_max: i64,
}

impl RegionOfInterest {
    pub fn new(x_min: i64, y_min: i64, x_max: i64, y_max: i64) -> Self {
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.x_min > self.x_max || self.y_min > self.y_max
    }

    pub fn width(&self) -> u64 {
        if self.is_empty() {
            0
        } else {
            (self.x_max - self.x_min) as u64 + 1
        }
    }

    pub fn height(&self) -> u64 {
        if self.is_empty() {
            0
        } else {
            (self.y_max - self.y_min) as u64 + 1
        }
    }

    pub fn area(&self) -> u64 {
        self.width() * self.height()
    }

    /// Intersection with a `width` x `height` image, or `None` if nothing is left.
    pub fn clipped(&self, width: usize, height: usize) -> Option<Self> {
        let r = Self {
            x_min: self.x_min.max(0),
            y_min: self.y_min.max(0),
            x_max: self.x_max.min(width as i64 - 1),
            y_max: self.y_max.min(height as i64 - 1),
        };
        (!r.is_empty()).then_some(r)
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }
}

/// A `width` x `height` grid of [`PotentialTuple`]s, row-major, origin at the
/// top-left pixel, `x` indexing columns and `y` rows.
///
/// Dimensions are fixed at construction; no operation resizes the grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IspField {
    width: usize,
    height: usize,
    cells: Vec<PotentialTuple>,
}

impl IspField {
    /// An all-background field.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyDimensions { width, height });
        }
        Ok(Self {
            width,
            height,
            cells: vec![PotentialTuple::BACKGROUND; width * height],
        })
    }

    pub fn from_cells(width: usize, height: usize, cells: Vec<PotentialTuple>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyDimensions { width, height });
        }
        if cells.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                found: (cells.len(), 1),
            });
        }
        Ok(Self {
            width,
            height,
            cells,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn cells(&self) -> &[PotentialTuple] {
        &self.cells
    }

    pub fn row(&self, y: usize) -> &[PotentialTuple] {
        &self.cells[y * self.width..(y + 1) * self.width]
    }

    pub fn get(&self, x: usize, y: usize) -> Option<PotentialTuple> {
        (x < self.width && y < self.height).then(|| self.cells[y * self.width + x])
    }

    /// Bytes held by the field, header plus cell storage.
    pub fn byte_size(&self) -> usize {
        mem::size_of::<Self>() + self.cells.capacity() * mem::size_of::<PotentialTuple>()
    }

    /// Back to all-background without touching the allocation.
    pub fn reset(&mut self) {
        self.cells.fill(PotentialTuple::BACKGROUND);
    }

    pub fn is_background(&self) -> bool {
        self.cells.iter().all(PotentialTuple::is_background)
    }

    /// Composes `value` into every cell of `roi` (after clipping). Cells keep
    /// whichever of their old value and `value` has the smaller `tau`, so a
    /// sequence of writes gives the same field in any order. A ROI entirely
    /// outside the field is a no-op.
    pub fn write_roi(&mut self, roi: RegionOfInterest, value: PotentialTuple) {
        let Some(r) = roi.clipped(self.width, self.height) else {
            return;
        };
        let (x0, x1) = (r.x_min as usize, r.x_max as usize);
        for y in r.y_min as usize..=r.y_max as usize {
            let row = &mut self.cells[y * self.width..(y + 1) * self.width];
            for cell in &mut row[x0..=x1] {
                *cell = min_tau(*cell, value);
            }
        }
    }

    fn check_same_dimensions(&self, other: &Self) -> Result<()> {
        if self.dimensions() != other.dimensions() {
            return Err(Error::DimensionMismatch {
                expected: self.dimensions(),
                found: other.dimensions(),
            });
        }
        Ok(())
    }

    /// Point-wise min-`tau` of two fields.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.compose_in_place(other)?;
        Ok(out)
    }

    pub fn compose_in_place(&mut self, other: &Self) -> Result<()> {
        self.check_same_dimensions(other)?;
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            *a = min_tau(*a, *b);
        }
        Ok(())
    }

    /// Left fold of [`compose`](Self::compose) starting from the background
    /// field of the given dimensions.
    pub fn compose_many<I>(width: usize, height: usize, fields: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: Borrow<IspField>,
    {
        let mut acc = Self::new(width, height)?;
        for f in fields {
            acc.compose_in_place(f.borrow())?;
        }
        Ok(acc)
    }

    /// Min-`tau` tuple over the inclusive window `[x_lo, x_hi] x [y_lo, y_hi]`,
    /// clipped to the field.
    pub fn min_over_window(&self, x_lo: i64, x_hi: i64, y_lo: i64, y_hi: i64) -> Result<PotentialTuple> {
        let r = RegionOfInterest::new(x_lo, y_lo, x_hi, y_hi)
            .clipped(self.width, self.height)
            .ok_or(Error::EmptyWindow)?;
        let (x0, x1) = (r.x_min as usize, r.x_max as usize);
        let mut best = PotentialTuple::BACKGROUND;
        for y in r.y_min as usize..=r.y_max as usize {
            best = self.row(y)[x0..=x1].iter().copied().fold(best, min_tau);
        }
        Ok(best)
    }

    /// Min-`tau` tuple over the whole field.
    pub fn min_tuple(&self) -> PotentialTuple {
        self.cells.iter().copied().fold(PotentialTuple::BACKGROUND, min_tau)
    }
}
