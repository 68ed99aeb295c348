//! Ideal pinhole camera in a 2D world, plus the synthetic segmenter that
//! turns agent bodies into image ROIs and scales.
//!
//! Conventions: world headings are counter-clockwise from `+X`. In the camera
//! frame `depth` runs along the view axis and `lateral` is positive to the
//! left. Image columns grow to the right, so a point on the left projects to
//! a column below the principal point. Column `i` spans `[i, i + 1)` and is
//! sampled at its center `i + 0.5`.

use libm::{atan, ceil, cos, floor, sin, sqrt, tan};

use crate::field::RegionOfInterest;
use crate::{Error, Result};

/// Bodies closer than this along the view axis are not projected.
pub const NEAR_PLANE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        let (dx, dy) = (other.x - self.x, other.y - self.y);
        sqrt(dx * dx + dy * dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    focal_length: f64,
    cx: f64,
    cy: f64,
    width: usize,
    height: usize,
}

impl CameraIntrinsics {
    pub fn new(focal_length: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyDimensions { width, height });
        }
        if !(focal_length > 0.0) || !focal_length.is_finite() {
            return Err(Error::OutOfRange {
                what: "focal_length",
                value: focal_length,
            });
        }
        if !(cx >= 0.0 && cx < width as f64) {
            return Err(Error::OutOfRange { what: "cx", value: cx });
        }
        if !(cy >= 0.0 && cy < height as f64) {
            return Err(Error::OutOfRange { what: "cy", value: cy });
        }
        Ok(Self {
            focal_length,
            cx,
            cy,
            width,
            height,
        })
    }

    /// Principal point at the image center.
    pub fn centered(focal_length: f64, width: usize, height: usize) -> Result<Self> {
        Self::new(focal_length, width as f64 / 2.0, height as f64 / 2.0, width, height)
    }

    pub fn focal_length(&self) -> f64 {
        self.focal_length
    }

    pub fn principal_point(&self) -> (f64, f64) {
        (self.cx, self.cy)
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

    /// Bearing of the ray through the center of `column`, positive to the
    /// right of the optical axis.
    pub fn column_to_angle(&self, column: usize) -> Result<f64> {
        if column >= self.width {
            return Err(Error::ColumnOutOfRange {
                column,
                width: self.width,
            });
        }
        Ok(atan((column as f64 + 0.5 - self.cx) / self.focal_length))
    }

    /// Column whose pixel span contains the ray at `angle`. May fall outside
    /// the image for wide angles.
    pub fn angle_to_column(&self, angle: f64) -> i64 {
        floor(self.cx + self.focal_length * tan(angle)) as i64
    }

    /// Image column (continuous) of a camera-frame point.
    pub fn image_x(&self, lateral: f64, depth: f64) -> f64 {
        self.cx - self.focal_length * lateral / depth
    }

    /// Projects a 3D camera-frame point `(X, Y, Z)` with `X`, `Y` parallel to
    /// the image plane onto continuous image coordinates. `None` behind the camera.
    pub fn project_point(&self, x: f64, y: f64, z: f64) -> Option<(f64, f64)> {
        (z > 0.0).then(|| (self.cx + self.focal_length * x / z, self.cy + self.focal_length * y / z))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    pub position: Point2,
    heading: f64,
}

impl CameraPose {
    pub fn new(position: Point2, heading: f64) -> Self {
        Self {
            position,
            heading: normalize_angle(heading),
        }
    }

    /// View-axis direction, in `(-pi, pi]`.
    pub fn heading(&self) -> f64 {
        self.heading
    }

    /// World point to `(lateral, depth)` in the camera frame.
    pub fn to_camera_frame(&self, p: Point2) -> (f64, f64) {
        let (dx, dy) = (p.x - self.position.x, p.y - self.position.y);
        let (s, c) = (sin(self.heading), cos(self.heading));
        let depth = dx * c + dy * s;
        let lateral = -dx * s + dy * c;
        (lateral, depth)
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(a: f64) -> f64 {
    use core::f64::consts::{PI, TAU};
    if !a.is_finite() {
        return a;
    }
    let mut r = a % TAU;
    if r <= -PI {
        r += TAU;
    } else if r > PI {
        r -= TAU;
    }
    r
}

/// An agent body seen as an upright rectangle that always faces the camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyBillboard {
    pub object_id: u32,
    pub center: Point2,
    pub world_width: f64,
    pub world_height: f64,
}

impl BodyBillboard {
    pub fn max_extent(&self) -> f64 {
        self.world_width.max(self.world_height)
    }

    pub fn half_diagonal(&self) -> f64 {
        0.5 * sqrt(self.world_width * self.world_width + self.world_height * self.world_height)
    }
}

/// Image scale of a world extent at the given depth, `f * extent / depth`.
/// `None` when the depth is not in front of the camera.
pub fn project_scale(intrinsics: &CameraIntrinsics, depth: f64, world_extent: f64) -> Option<f64> {
    (depth > 0.0).then(|| intrinsics.focal_length * world_extent / depth)
}

/// Image distance between the projections of two points lying in a plane at
/// `depth` parallel to the image plane.
pub fn segment_scale(intrinsics: &CameraIntrinsics, a: Point2, b: Point2, depth: f64) -> Option<f64> {
    let pa = intrinsics.project_point(a.x, a.y, depth)?;
    let pb = intrinsics.project_point(b.x, b.y, depth)?;
    let (du, dv) = (pb.0 - pa.0, pb.1 - pa.1);
    Some(sqrt(du * du + dv * dv))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// Clipped to the image.
    pub roi: RegionOfInterest,
    /// Unclipped scale, `f * max(width, height) / depth`. Can exceed the image size.
    pub scale: f64,
    pub depth: f64,
}

// Keeps float-to-int casts far from saturation for bodies right at the near plane.
const PIXEL_LIMIT: f64 = 1.0e9;

fn pixel_span(lo: f64, hi: f64) -> (i64, i64) {
    let lo = lo.clamp(-PIXEL_LIMIT, PIXEL_LIMIT);
    let hi = hi.clamp(-PIXEL_LIMIT, PIXEL_LIMIT);
    let first = floor(lo) as i64;
    let last = (ceil(hi) as i64 - 1).max(first);
    (first, last)
}

/// Synthetic segmentation of one body: its ROI in the image and its scale.
pub fn project_billboard(intrinsics: &CameraIntrinsics, pose: &CameraPose, body: &BodyBillboard) -> Option<Projection> {
    let (lateral, depth) = pose.to_camera_frame(body.center);
    if depth <= NEAR_PLANE {
        return None;
    }
    let f = intrinsics.focal_length;
    let half_w = 0.5 * body.world_width;
    let half_h = 0.5 * body.world_height;
    let (x0, x1) = pixel_span(intrinsics.image_x(lateral + half_w, depth), intrinsics.image_x(lateral - half_w, depth));
    let (y0, y1) = pixel_span(intrinsics.cy - f * half_h / depth, intrinsics.cy + f * half_h / depth);
    let roi = RegionOfInterest::new(x0, y0, x1, y1).clipped(intrinsics.width, intrinsics.height)?;
    Some(Projection {
        roi,
        scale: f * body.max_extent() / depth,
        depth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn camera_frame_transform() {
        let pose = CameraPose::new(Point2::new(0.0, 0.0), 0.0);
        assert_eq!(pose.to_camera_frame(Point2::new(5.0, 0.0)), (0.0, 5.0));
        // lateral is positive to the left of the view axis
        assert_eq!(pose.to_camera_frame(Point2::new(5.0, 2.0)), (2.0, 5.0));
        assert_eq!(pose.to_camera_frame(Point2::new(5.0, -2.0)), (-2.0, 5.0));
        let pose = CameraPose::new(Point2::new(1.0, 1.0), FRAC_PI_2);
        let (lat, depth) = pose.to_camera_frame(Point2::new(1.0, 4.0));
        assert!(close(lat, 0.0) && close(depth, 3.0));
    }

    #[test]
    fn headings_normalize() {
        assert!(close(normalize_angle(3.0 * PI), PI));
        assert!(close(normalize_angle(-PI), PI));
        assert!(close(normalize_angle(-3.0 * FRAC_PI_2), FRAC_PI_2));
        assert!(close(CameraPose::new(Point2::default(), 2.0 * PI + 0.25).heading(), 0.25));
    }

    #[test]
    fn scale_examples() {
        let unit = CameraIntrinsics::new(1.0, 0.0, 0.0, 1, 1).unwrap();
        let s = segment_scale(&unit, Point2::new(0.0, 0.0), Point2::new(3.0, 4.0), 10.0).unwrap();
        assert!(close(s, 0.5));
        let cam = CameraIntrinsics::centered(100.0, 640, 480).unwrap();
        assert!(close(project_scale(&cam, 20.0, 2.0).unwrap(), 10.0));
        assert_eq!(project_scale(&cam, 0.0, 2.0), None);
        assert_eq!(project_scale(&cam, -1.0, 2.0), None);
    }

    #[test]
    fn scale_inverse_identity() {
        let cam = CameraIntrinsics::centered(320.0, 640, 480).unwrap();
        for (z, e) in [(1.0, 2.0), (7.25, 0.5), (100.0, 4.0), (0.5, 0.125)] {
            let s = project_scale(&cam, z, e).unwrap();
            assert_eq!(s * z / cam.focal_length(), e);
        }
    }

    #[test]
    fn billboard_dead_ahead() {
        let cam = CameraIntrinsics::centered(100.0, 640, 480).unwrap();
        let pose = CameraPose::new(Point2::default(), 0.0);
        let body = BodyBillboard {
            object_id: 1,
            center: Point2::new(20.0, 0.0),
            world_width: 2.0,
            world_height: 2.0,
        };
        let p = project_billboard(&cam, &pose, &body).unwrap();
        assert_eq!(p.roi, RegionOfInterest::new(315, 235, 324, 244));
        assert!(close(p.scale, 10.0));
    }

    #[test]
    fn billboard_not_visible() {
        let cam = CameraIntrinsics::centered(100.0, 640, 480).unwrap();
        let pose = CameraPose::new(Point2::default(), 0.0);
        let mut body = BodyBillboard {
            object_id: 1,
            center: Point2::new(0.005, 0.0),
            world_width: 2.0,
            world_height: 2.0,
        };
        assert!(project_billboard(&cam, &pose, &body).is_none());
        body.center = Point2::new(-10.0, 0.0);
        assert!(project_billboard(&cam, &pose, &body).is_none());
        body.center = Point2::new(10.0, 500.0);
        assert!(project_billboard(&cam, &pose, &body).is_none());
    }

    #[test]
    fn clipped_billboard_keeps_full_scale() {
        let cam = CameraIntrinsics::centered(100.0, 64, 48).unwrap();
        let pose = CameraPose::new(Point2::default(), 0.0);
        let body = BodyBillboard {
            object_id: 1,
            center: Point2::new(1.0, 0.5),
            world_width: 2.0,
            world_height: 1.0,
        };
        let p = project_billboard(&cam, &pose, &body).unwrap();
        assert!(close(p.scale, 200.0));
        assert_eq!(p.roi, RegionOfInterest::new(0, 0, 63, 47));
    }

    #[test]
    fn column_angles() {
        let cam = CameraIntrinsics::new(320.0, 319.5, 240.0, 640, 480).unwrap();
        assert!(close(cam.column_to_angle(319).unwrap(), 0.0));
        assert!(close(cam.column_to_angle(639).unwrap(), FRAC_PI_4));
        assert!(cam.column_to_angle(640).is_err());
        let mut prev = f64::NEG_INFINITY;
        for i in 0..640 {
            let a = cam.column_to_angle(i).unwrap();
            assert!(a > prev);
            prev = a;
            assert_eq!(cam.angle_to_column(a), i as i64);
        }
    }

    #[test]
    fn invalid_intrinsics() {
        assert!(CameraIntrinsics::new(0.0, 1.0, 1.0, 4, 4).is_err());
        assert!(CameraIntrinsics::new(1.0, 4.0, 1.0, 4, 4).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, -1.0, 4, 4).is_err());
        assert!(CameraIntrinsics::new(1.0, 0.0, 0.0, 0, 4).is_err());
    }
}
