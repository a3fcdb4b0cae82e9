//! Experiment harness for the slip detector: benchmark over the synthetic
//! suite, closed-loop grip simulation, file ingestion, latency measurement
//! and report files.

pub mod benchmark;
pub mod config;
pub mod control;
pub mod error;
pub mod gates;
pub mod ingest;
pub mod latency;
pub mod report;

pub use benchmark::{run_benchmark, Classification, Detected, MetricsRow, MetricsTable, TrialOutcome};
pub use config::{FramePath, HarnessConfig};
pub use control::{run_control_loop, ControlTrace, GripControllerState, Scenario};
pub use error::{Error, Result};
pub use ingest::{IngestFormat, IngestRegistry};
