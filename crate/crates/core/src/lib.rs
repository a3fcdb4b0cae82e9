//! Incipient slip detection for marker-based tactile sensors.
//!
//! A frame's marker displacement field is compared with the field of the
//! planar rigid motion fitted to the inner (stick) part of the contact
//! patch. Markers whose residual exceeds a threshold are slipping; enough of
//! them flag incipient slip.
//!
//! Modules, bottom up:
//! - [`geometry`]: planar rigid-body kinematics.
//! - [`raster`]: contact region and marker centroids from grayscale images.
//! - [`tracking`]: marker correspondence and displacement fields.
//! - [`rigid_fit`]: inner-region selection and rigid motion estimation.
//! - [`detector`]: slip field, per-frame verdict and reference management.

pub mod detector;
pub mod error;
pub mod frame;
pub mod geometry;
pub mod raster;
pub mod rigid_fit;
pub mod tracking;

pub use detector::{
    estimate_field, slip_field, DecisionRecord, DetectorConfig, DetectorState, SlipDecision,
    SlipDetector, SlipField, Verdict,
};
pub use error::{Error, Result};
pub use frame::{FrameSnapshot, MarkerMask, RasterConfig};
pub use geometry::{apply_motion, icr, propagate_velocity, RigidMotion2D, Vec2};
pub use raster::{ContactMask, GrayImage, MarkerObservation, SensorGeometry};
pub use rigid_fit::{fit_rigid, observability_spread, select_inner, InnerSelection, RigidFitResult};
pub use tracking::{displacement_field, match_markers, Correspondence, DisplacementField};
