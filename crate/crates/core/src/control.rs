//! Safe control sets read directly off an ISP field, and goal-guided selection
//! inside them.
//!
//! Steering: a min filter `w_theta` columns wide and the full image height is
//! swept across the field; every column whose filtered `tau` reaches the
//! headway `T_s` is a safe steering direction. Acceleration: the min tuple of a
//! centered `w_a`-wide window decides between the full scaled range `[-1, 1]`,
//! gentle braking `[-1, 0)` and full braking `[-1, -1]`.
//!
//! The work done here depends only on the field dimensions and the window
//! widths. See [`OpCounter`].

use alloc::vec;
use alloc::vec::Vec;

use libm::fabs;

use crate::camera::CameraIntrinsics;
use crate::field::{min_tau, IspField, PotentialTuple};
use crate::tau::braking_decision;
use crate::{Error, ExtendedReal, Result};

/// Upper bound of `[-1, 0)` once projected to a closed interval.
pub const OPEN_BOUND_MARGIN: f64 = 1e-3;

/// How [`choose_controls`] picks a steering angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SteeringSelection {
    /// Closest safe angle to the goal; the result is always a safe angle.
    #[default]
    SafeMembership,
    /// Start from the current steering angle and only replace it with a safe
    /// angle that is strictly closer to the goal. Can keep an unsafe angle.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerParams {
    /// Minimum acceptable time-to-contact, seconds.
    pub time_headway: f64,
    /// Steering min-filter width in columns.
    pub w_theta: usize,
    /// Acceleration window width in columns.
    pub w_a: usize,
    /// Buffer of the braking decision.
    pub epsilon: f64,
    /// Expected `tau_dot`. Carried for completeness; no rule reads it.
    pub tau_dot_e: f64,
    /// Proportional speed-tracking gain, 1/s.
    pub k_p: f64,
    pub selection: SteeringSelection,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self {
            time_headway: 2.0,
            w_theta: 9,
            w_a: 21,
            epsilon: 0.1,
            tau_dot_e: 0.0,
            k_p: 0.5,
            selection: SteeringSelection::SafeMembership,
        }
    }
}

impl ControllerParams {
    pub fn validate(&self, image_width: usize) -> Result<()> {
        if !(self.time_headway > 0.0) || !self.time_headway.is_finite() {
            return Err(Error::OutOfRange {
                what: "time_headway",
                value: self.time_headway,
            });
        }
        if self.w_theta == 0 || self.w_theta > image_width {
            return Err(Error::OutOfRange {
                what: "w_theta",
                value: self.w_theta as f64,
            });
        }
        if self.w_a == 0 || self.w_a > image_width {
            return Err(Error::OutOfRange {
                what: "w_a",
                value: self.w_a as f64,
            });
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::OutOfRange {
                what: "epsilon",
                value: self.epsilon,
            });
        }
        if !(self.k_p > 0.0) || !self.k_p.is_finite() {
            return Err(Error::OutOfRange { what: "k_p", value: self.k_p });
        }
        if self.tau_dot_e.is_nan() {
            return Err(Error::NotANumber("tau_dot_e"));
        }
        Ok(())
    }
}

/// Scaled acceleration interval. Only the three constants below are ever produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelInterval {
    pub lo: f64,
    pub hi: f64,
    pub hi_open: bool,
}

impl AccelInterval {
    pub const FULL_RANGE: Self = Self {
        lo: -1.0,
        hi: 1.0,
        hi_open: false,
    };
    pub const BRAKE: Self = Self {
        lo: -1.0,
        hi: 0.0,
        hi_open: true,
    };
    pub const FULL_BRAKE: Self = Self {
        lo: -1.0,
        hi: -1.0,
        hi_open: false,
    };

    pub fn contains(&self, a: f64) -> bool {
        a >= self.lo && if self.hi_open { a < self.hi } else { a <= self.hi }
    }

    /// Nearest member of the interval. The open end `[-1, 0)` is treated as
    /// `[-1, -OPEN_BOUND_MARGIN]`.
    pub fn clamp(&self, a: f64) -> f64 {
        let hi = if self.hi_open { self.hi - OPEN_BOUND_MARGIN } else { self.hi };
        if a.is_nan() {
            return self.lo;
        }
        a.clamp(self.lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafeColumn {
    pub column: usize,
    /// Bearing of the column center, positive to the right.
    pub angle: f64,
    pub tuple: PotentialTuple,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlSet {
    pub safe_columns: Vec<SafeColumn>,
    /// Set when no column is safe; steering then defaults to straight ahead.
    pub fallback_straight: bool,
    pub accel: AccelInterval,
    /// Min tuple over the central acceleration window.
    pub central_min: PotentialTuple,
}

/// Counts the elementary steps taken by the control routines.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounter {
    pub cell_reads: u64,
    pub comparisons: u64,
}

trait Tally {
    fn reads(&mut self, n: u64);
    fn compares(&mut self, n: u64);
}

struct NoTally;

impl Tally for NoTally {
    #[inline(always)]
    fn reads(&mut self, _: u64) {}
    #[inline(always)]
    fn compares(&mut self, _: u64) {}
}

impl Tally for OpCounter {
    #[inline(always)]
    fn reads(&mut self, n: u64) {
        self.cell_reads += n;
    }
    #[inline(always)]
    fn compares(&mut self, n: u64) {
        self.comparisons += n;
    }
}

/// Per-column min tuple over a `w_theta`-wide, full-height window centered on
/// each column (`i - w_theta/2 ..= i + w_theta/2`, clipped at the borders).
pub fn column_min_map(field: &IspField, w_theta: usize) -> Result<Vec<PotentialTuple>> {
    column_min_map_with(field, w_theta, &mut NoTally)
}

/// [`column_min_map`] that also counts its work.
pub fn column_min_map_counted(field: &IspField, w_theta: usize, ops: &mut OpCounter) -> Result<Vec<PotentialTuple>> {
    column_min_map_with(field, w_theta, ops)
}

fn column_min_map_with<T: Tally>(field: &IspField, w_theta: usize, ops: &mut T) -> Result<Vec<PotentialTuple>> {
    let width = field.width();
    if w_theta == 0 || w_theta > width {
        return Err(Error::OutOfRange {
            what: "w_theta",
            value: w_theta as f64,
        });
    }

    let mut per_column = field.row(0).to_vec();
    ops.reads(width as u64);
    for y in 1..field.height() {
        for (acc, cell) in per_column.iter_mut().zip(field.row(y)) {
            *acc = min_tau(*acc, *cell);
        }
        ops.reads(width as u64);
        ops.compares(width as u64);
    }

    // Sliding minimum over columns with the van Herk / Gil-Werman scheme:
    // block prefix and suffix minima give every window in two comparisons,
    // with a step count that does not depend on the data. Out-of-image
    // columns are padded with the background tuple, which is the identity.
    let radius = w_theta / 2;
    let k = 2 * radius + 1;
    let padded_len = (width + 2 * radius).div_ceil(k) * k;
    let mut padded = vec![PotentialTuple::BACKGROUND; padded_len];
    padded[radius..radius + width].copy_from_slice(&per_column);

    let mut prefix = padded.clone();
    let mut suffix = padded;
    for j in 0..padded_len {
        if j % k != 0 {
            prefix[j] = min_tau(prefix[j - 1], prefix[j]);
        }
        let r = padded_len - 1 - j;
        if r % k != k - 1 {
            suffix[r] = min_tau(suffix[r + 1], suffix[r]);
        }
    }
    ops.compares(2 * (padded_len - padded_len / k) as u64);

    for (i, out) in per_column.iter_mut().enumerate() {
        *out = min_tau(suffix[i], prefix[i + k - 1]);
    }
    ops.compares(width as u64);
    Ok(per_column)
}

/// Safe steering columns and the allowed acceleration interval for a field.
pub fn safe_controls(field: &IspField, intrinsics: &CameraIntrinsics, params: &ControllerParams) -> Result<ControlSet> {
    safe_controls_with(field, intrinsics, params, &mut NoTally)
}

/// [`safe_controls`] that also counts its work.
pub fn safe_controls_counted(
    field: &IspField,
    intrinsics: &CameraIntrinsics,
    params: &ControllerParams,
    ops: &mut OpCounter,
) -> Result<ControlSet> {
    safe_controls_with(field, intrinsics, params, ops)
}

fn safe_controls_with<T: Tally>(
    field: &IspField,
    intrinsics: &CameraIntrinsics,
    params: &ControllerParams,
    ops: &mut T,
) -> Result<ControlSet> {
    if field.dimensions() != intrinsics.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: intrinsics.dimensions(),
            found: field.dimensions(),
        });
    }
    params.validate(field.width())?;
    let headway = ExtendedReal::new(params.time_headway)?;

    let filtered = column_min_map_with(field, params.w_theta, ops)?;
    let mut safe_columns = Vec::with_capacity(filtered.len());
    for (column, tuple) in filtered.into_iter().enumerate() {
        if tuple.tau() >= headway {
            safe_columns.push(SafeColumn {
                column,
                angle: intrinsics.column_to_angle(column)?,
                tuple,
            });
        }
    }
    ops.compares(field.width() as u64);

    let center = (field.width() / 2) as i64;
    let left = center - (params.w_a / 2) as i64;
    let right = left + params.w_a as i64 - 1;
    let central_min = field.min_over_window(left, right, 0, field.height() as i64 - 1)?;
    ops.reads((params.w_a * field.height()) as u64);
    ops.compares((params.w_a * field.height()) as u64);

    let (fallback_straight, accel) = if safe_columns.is_empty() {
        (true, AccelInterval::FULL_BRAKE)
    } else if central_min.tau() > headway {
        (false, AccelInterval::FULL_RANGE)
    } else if braking_decision(central_min.tau_dot(), params.epsilon)? {
        (false, AccelInterval::BRAKE)
    } else {
        (false, AccelInterval::FULL_BRAKE)
    };

    Ok(ControlSet {
        safe_columns,
        fallback_straight,
        accel,
        central_min,
    })
}

/// A steering bearing (positive right) and a scaled acceleration in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controls {
    pub steering: f64,
    pub accel: f64,
}

/// Picks the steering angle closest to `goal_angle` within the safe set and a
/// proportional speed-tracking acceleration clamped into the safe interval.
///
/// Equidistant safe angles resolve to the one nearer straight ahead, then to
/// the smaller angle, so the result does not depend on enumeration order.
pub fn choose_controls(
    set: &ControlSet,
    goal_angle: f64,
    current_steering: f64,
    current_speed: f64,
    setpoint_speed: f64,
    params: &ControllerParams,
) -> Controls {
    let steering = if set.fallback_straight {
        0.0
    } else {
        match params.selection {
            SteeringSelection::SafeMembership => {
                let mut best = set.safe_columns[0].angle;
                for c in &set.safe_columns[1..] {
                    let (d_new, d_best) = (fabs(c.angle - goal_angle), fabs(best - goal_angle));
                    let nearer_straight = fabs(c.angle) < fabs(best) || (fabs(c.angle) == fabs(best) && c.angle < best);
                    if d_new < d_best || (d_new == d_best && nearer_straight) {
                        best = c.angle;
                    }
                }
                best
            }
            SteeringSelection::Literal => {
                let mut best = current_steering;
                for c in &set.safe_columns {
                    if fabs(c.angle - goal_angle) < fabs(best - goal_angle) {
                        best = c.angle;
                    }
                }
                best
            }
        }
    };
    let accel = set.accel.clamp(params.k_p * (setpoint_speed - current_speed));
    Controls { steering, accel }
}

/// [`safe_controls`] followed by [`choose_controls`] toward a goal pixel.
#[allow(clippy::too_many_arguments)]
pub fn guided_control(
    goal_pixel: (usize, usize),
    field: &IspField,
    intrinsics: &CameraIntrinsics,
    params: &ControllerParams,
    current_steering: f64,
    current_speed: f64,
    setpoint_speed: f64,
) -> Result<(Controls, ControlSet)> {
    let (x, y) = goal_pixel;
    if x >= intrinsics.width() || y >= intrinsics.height() {
        return Err(Error::PixelOutOfRange { x, y });
    }
    let goal_angle = intrinsics.column_to_angle(x)?;
    let set = safe_controls(field, intrinsics, params)?;
    let controls = choose_controls(&set, goal_angle, current_steering, current_speed, setpoint_speed, params);
    Ok((controls, set))
}
