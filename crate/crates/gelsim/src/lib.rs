//! Quasi-static gel contact simulator.
//!
//! Each marker of the gel grid is tied to the object by an independent
//! shear spring with a Coulomb limit `μ·p_i`. Driving the object along a
//! [`LoadScript`] yields marker trajectories with per-marker stick/slip
//! ground truth; [`render`] turns a frame into a synthetic tactile image.

mod error;
mod export;
mod model;
mod object;
mod render;
mod script;
mod sim;
mod suite;

pub use error::{Error, Result};
pub use export::{
    frame_file_name, read_manifest, write_trial, TrialManifest, WriteOptions, FRAMES_DIR,
    MANIFEST_FILE, MARKERS_FILE,
};
pub use model::{GelModel, RenderParams};
pub use object::{ObjectSpec, PatchShape, PressureProfile};
pub use render::render;
pub use script::{LoadFrame, LoadScript};
pub use sim::{simulate, torque_capacity, GelSimulation, FrameLabel, GroundTruthFrame, MarkerState};
pub use suite::{benchmark_objects, benchmark_suite, Trial, TrialKind, TrialLabel};
