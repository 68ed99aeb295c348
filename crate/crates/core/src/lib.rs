//! Image-space potential (ISP) fields.
//!
//! An ISP field is a fixed-size grid, aligned with a camera image, whose cells
//! hold a time-to-contact tuple `<tau, tau_dot>`. Fields for individually
//! tracked objects are merged by point-wise minimum-`tau` selection, and the
//! controllers in [`control`] read steering and acceleration sets straight off
//! the merged field. Because the grid never changes size, the memory footprint
//! of the representation and the work done by the controllers depend only on
//! the image dimensions, never on how many objects are in view.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and benchmarking live in the `ispnav` companion crate.
#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style checks are there to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod camera;
pub mod control;
mod error;
pub mod extended;
pub mod field;
pub mod sim;
pub mod tau;

pub use camera::{BodyBillboard, CameraIntrinsics, CameraPose};
pub use control::{AccelInterval, ControlSet, ControllerParams, SteeringSelection};
pub use error::Error;
pub use extended::ExtendedReal;
pub use field::{IspField, PotentialTuple, RegionOfInterest};
pub use sim::{AgentMode, AgentSpec, AgentState, Scenario, SimConfig, Simulation, TraceRecord};
pub use tau::{EstimatorParams, ScaleTrack};

pub type Result<T> = core::result::Result<T, Error>;
