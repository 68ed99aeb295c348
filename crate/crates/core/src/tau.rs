//! Scale-based time-to-contact estimation.
//!
//! An approaching object grows on the image plane. With `s` its scale (largest
//! image extent) and `s_dot` the rate of growth, `tau = s / s_dot`. The tracker
//! below estimates `s_dot` and `tau_dot` with backward differences, optionally
//! exponentially smoothed.

use crate::field::{IspField, PotentialTuple, RegionOfInterest};
use crate::{Error, ExtendedReal, Result};

/// Tuning for [`ScaleTrack::push`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorParams {
    /// Weight of the newest backward difference, in `(0, 1]`. `1` disables smoothing.
    pub smoothing_alpha: f64,
    /// Samples a track needs before it contributes to a sensed field (at least 2).
    pub min_samples: usize,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        Self {
            smoothing_alpha: 1.0,
            min_samples: 2,
        }
    }
}

impl EstimatorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.smoothing_alpha > 0.0 && self.smoothing_alpha <= 1.0) {
            return Err(Error::OutOfRange {
                what: "smoothing_alpha",
                value: self.smoothing_alpha,
            });
        }
        Ok(())
    }

    /// `min_samples`, never below the two samples needed to define `tau`.
    pub fn effective_min_samples(&self) -> usize {
        self.min_samples.max(2)
    }
}

/// `tau = s / s_dot` for an expanding object, `+inf` when the scale is
/// constant or shrinking (no predicted contact).
pub fn tau_from_scale(s: f64, s_dot: f64) -> Result<ExtendedReal> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::OutOfRange { what: "scale", value: s });
    }
    if s_dot.is_nan() {
        return Err(Error::NotANumber("scale rate"));
    }
    if s_dot > 0.0 {
        ExtendedReal::new(s / s_dot)
    } else {
        Ok(ExtendedReal::INFINITY)
    }
}

/// `true` when `tau_dot >= -0.5 + epsilon`, i.e. the current deceleration is
/// enough to stop short of contact with `epsilon` to spare.
pub fn braking_decision(tau_dot: ExtendedReal, epsilon: f64) -> Result<bool> {
    if !(epsilon > 0.0) {
        return Err(Error::OutOfRange {
            what: "epsilon",
            value: epsilon,
        });
    }
    Ok(tau_dot.get() >= -0.5 + epsilon)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleSample {
    pub t: f64,
    pub s: f64,
    pub roi: RegionOfInterest,
}

/// Running scale estimate for one tracked object.
///
/// Only the newest sample is retained along with the sample count: the
/// backward differences never look further back, so a track's footprint does
/// not grow with its age.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleTrack {
    object_id: u32,
    sample_count: usize,
    last: Option<ScaleSample>,
    s_dot: Option<f64>,
    tau: Option<ExtendedReal>,
    tau_dot: Option<ExtendedReal>,
}

impl ScaleTrack {
    pub fn new(object_id: u32) -> Self {
        Self {
            object_id,
            sample_count: 0,
            last: None,
            s_dot: None,
            tau: None,
            tau_dot: None,
        }
    }

    pub fn object_id(&self) -> u32 {
        self.object_id
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn last_sample(&self) -> Option<&ScaleSample> {
        self.last.as_ref()
    }

    /// Present once two samples have been seen.
    pub fn s_dot(&self) -> Option<f64> {
        self.s_dot
    }

    pub fn tau(&self) -> Option<ExtendedReal> {
        self.tau
    }

    /// Present once `tau` has been computed at two consecutive samples.
    /// `+inf` when either of those `tau` values was infinite.
    pub fn tau_dot(&self) -> Option<ExtendedReal> {
        self.tau_dot
    }

    /// The track's current `<tau, tau_dot>`, with `tau_dot = +inf` until it
    /// is defined.
    pub fn tuple(&self) -> Option<PotentialTuple> {
        let tau = self.tau?;
        PotentialTuple::from_extended(tau, self.tau_dot.unwrap_or(ExtendedReal::INFINITY)).ok()
    }

    /// Returns the track extended by one observation.
    pub fn updated(&self, t: f64, s: f64, roi: RegionOfInterest, params: &EstimatorParams) -> Result<Self> {
        let mut next = self.clone();
        next.push(t, s, roi, params)?;
        Ok(next)
    }

    /// In-place form of [`updated`](Self::updated). On error the track is unchanged.
    pub fn push(&mut self, t: f64, s: f64, roi: RegionOfInterest, params: &EstimatorParams) -> Result<()> {
        params.validate()?;
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::OutOfRange { what: "scale", value: s });
        }
        if !t.is_finite() {
            return Err(Error::OutOfRange { what: "time", value: t });
        }
        let alpha = params.smoothing_alpha;
        let sample = ScaleSample { t, s, roi };

        let Some(prev) = self.last else {
            self.last = Some(sample);
            self.sample_count = 1;
            return Ok(());
        };
        if !(t > prev.t) {
            return Err(Error::NonIncreasingTime { last: prev.t, next: t });
        }
        let dt = t - prev.t;

        let raw = (s - prev.s) / dt;
        let s_dot = match self.s_dot {
            Some(old) => alpha * raw + (1.0 - alpha) * old,
            None => raw,
        };
        let tau = tau_from_scale(s, s_dot)?;

        let tau_dot = match self.tau {
            None => None,
            Some(prev_tau) if prev_tau.is_finite() && tau.is_finite() => {
                let raw = (tau.get() - prev_tau.get()) / dt;
                let v = match self.tau_dot {
                    Some(old) if old.is_finite() => alpha * raw + (1.0 - alpha) * old.get(),
                    _ => raw,
                };
                Some(ExtendedReal::new(v)?)
            }
            Some(_) => Some(ExtendedReal::INFINITY),
        };

        self.last = Some(sample);
        self.sample_count += 1;
        self.s_dot = Some(s_dot);
        self.tau = Some(tau);
        self.tau_dot = tau_dot;
        Ok(())
    }

    /// Composes the track's tuple over its latest ROI into `field`.
    pub fn write_into(&self, field: &mut IspField) -> Result<()> {
        let tuple = self.tuple().ok_or(Error::TauUndefined {
            samples: self.sample_count,
        })?;
        let roi = self.last.map(|s| s.roi).ok_or(Error::TauUndefined { samples: 0 })?;
        field.write_roi(roi, tuple);
        Ok(())
    }
}

/// The field of a single tracked object: background everywhere except the
/// object's latest ROI.
pub fn object_field(track: &ScaleTrack, width: usize, height: usize) -> Result<IspField> {
    let mut field = IspField::new(width, height)?;
    track.write_into(&mut field)?;
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roi() -> RegionOfInterest {
        RegionOfInterest::new(0, 0, 1, 1)
    }

    fn track(samples: &[(f64, f64)], params: &EstimatorParams) -> ScaleTrack {
        let mut tr = ScaleTrack::new(7);
        for &(t, s) in samples {
            tr.push(t, s, roi(), params).unwrap();
        }
        tr
    }

    #[test]
    fn tau_is_scale_over_rate() {
        assert_eq!(tau_from_scale(10.0, 5.0).unwrap().get(), 2.0);
        assert_eq!(tau_from_scale(10.0, -1.0).unwrap(), ExtendedReal::INFINITY);
        assert_eq!(tau_from_scale(10.0, 0.0).unwrap(), ExtendedReal::INFINITY);
        assert!(tau_from_scale(0.0, 1.0).is_err());
        assert!(tau_from_scale(-1.0, 1.0).is_err());
    }

    #[test]
    fn two_samples_give_rate_and_tau() {
        let tr = track(&[(0.0, 10.0), (1.0, 15.0)], &EstimatorParams::default());
        assert_eq!(tr.s_dot(), Some(5.0));
        assert_eq!(tr.tau().unwrap().get(), 3.0);
        assert_eq!(tr.tau_dot(), None);
    }

    #[test]
    fn constant_scale_never_contacts() {
        let tr = track(&[(0.0, 10.0), (1.0, 10.0), (2.0, 10.0)], &EstimatorParams::default());
        assert_eq!(tr.s_dot(), Some(0.0));
        assert_eq!(tr.tau(), Some(ExtendedReal::INFINITY));
        assert_eq!(tr.tau_dot(), Some(ExtendedReal::INFINITY));
    }

    #[test]
    fn single_sample_has_nothing_defined() {
        let tr = track(&[(0.0, 10.0)], &EstimatorParams::default());
        assert_eq!(tr.sample_count(), 1);
        assert!(tr.s_dot().is_none() && tr.tau().is_none() && tr.tau_dot().is_none());
        assert!(object_field(&tr, 4, 4).is_err());
    }

    #[test]
    fn rejects_bad_samples() {
        let p = EstimatorParams::default();
        let mut tr = track(&[(1.0, 10.0)], &p);
        assert!(matches!(tr.push(1.0, 11.0, roi(), &p), Err(Error::NonIncreasingTime { .. })));
        assert!(matches!(tr.push(0.5, 11.0, roi(), &p), Err(Error::NonIncreasingTime { .. })));
        assert!(tr.push(2.0, 0.0, roi(), &p).is_err());
        assert!(tr.push(2.0, -3.0, roi(), &p).is_err());
        assert_eq!(tr.sample_count(), 1);
        let bad = EstimatorParams {
            smoothing_alpha: 0.0,
            ..p
        };
        assert!(tr.push(2.0, 11.0, roi(), &bad).is_err());
    }

    #[test]
    fn smoothing_blends_differences() {
        let p = EstimatorParams {
            smoothing_alpha: 0.5,
            min_samples: 2,
        };
        // raw differences 5 then 9; smoothed 5 then 0.5*9 + 0.5*5 = 7
        let tr = track(&[(0.0, 10.0), (1.0, 15.0), (2.0, 24.0)], &p);
        assert_eq!(tr.s_dot(), Some(7.0));
        assert!((tr.tau().unwrap().get() - 24.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn updated_leaves_original_alone() {
        let p = EstimatorParams::default();
        let a = track(&[(0.0, 10.0)], &p);
        let b = a.updated(1.0, 12.0, roi(), &p).unwrap();
        assert_eq!(a.sample_count(), 1);
        assert_eq!(b.sample_count(), 2);
    }

    #[test]
    fn braking_threshold() {
        let eps = 0.1;
        let d = |v: f64| braking_decision(ExtendedReal::from_f64(v), eps).unwrap();
        assert!(d(0.0));
        assert!(!d(-0.5));
        assert!(d(-0.39));
        assert!(!d(-0.41));
        assert!(d(f64::INFINITY));
        assert!(!d(f64::NEG_INFINITY));
        assert!(braking_decision(ExtendedReal::ZERO, 0.0).is_err());
        assert!(braking_decision(ExtendedReal::ZERO, -0.1).is_err());
    }

    #[test]
    fn braking_decision_is_monotone() {
        let mut prev = false;
        for i in -200..=200 {
            let v = i as f64 * 0.01;
            let d = braking_decision(ExtendedReal::from_f64(v), 0.05).unwrap();
            assert!(d >= prev);
            prev = d;
        }
    }

    #[test]
    fn object_field_covers_roi() {
        let p = EstimatorParams::default();
        // s: 10 -> 15 over 1 s gives tau 3, then 15 -> 20 gives tau 4 (receding in tau terms)
        let mut tr = ScaleTrack::new(1);
        let r = RegionOfInterest::new(2, 3, 4, 4);
        tr.push(0.0, 10.0, r, &p).unwrap();
        tr.push(1.0, 15.0, r, &p).unwrap();
        let f = object_field(&tr, 8, 8).unwrap();
        let hit = PotentialTuple::new(3.0, f64::INFINITY).unwrap();
        assert_eq!(f.cells().iter().filter(|c| **c == hit).count(), 6);
        assert_eq!(f.cells().iter().filter(|c| c.is_background()).count(), 58);
    }

    #[test]
    fn receding_object_leaves_background() {
        let p = EstimatorParams::default();
        let tr = track(&[(0.0, 10.0), (1.0, 8.0), (2.0, 7.0)], &p);
        assert!(object_field(&tr, 4, 4).unwrap().is_background());
    }
}
