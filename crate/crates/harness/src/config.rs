//! Harness configuration, read from TOML. Every section and key is optional.

use std::path::Path;

use gelsim::{GelModel, ObjectSpec, PatchShape, PressureProfile};
use serde::{Deserialize, Serialize};
use tactile_slip::{DetectorConfig, MarkerMask, RasterConfig, Vec2};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub detector: DetectorConfig,
    pub raster: RasterConfig,
    pub marker_mask: MarkerMask,
    pub model: GelModel,
    pub suite: SuiteConfig,
    pub benchmark: BenchmarkConfig,
    pub control: ControlConfig,
    pub latency: LatencyConfig,
}

impl HarnessConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        self.detector.validate()?;
        self.model.validate()?;
        self.control.validate()?;
        if self.latency.frames == 0 || self.latency.small_markers == 0 {
            return Err(Error::Config("latency frames and marker count must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: 1 }
    }
}

/// Which input the detector sees in a benchmark run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FramePath {
    /// Simulator marker tables, as exported to CSV.
    #[default]
    Markers,
    /// Rendered images through the raster pipeline.
    Raster,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkConfig {
    pub path: FramePath,
    /// When set, a slip trial counts as detected only if the first
    /// IncipientSlip verdict falls within this many frames after the
    /// ground-truth onset.
    pub onset_window: Option<u64>,
}

/// Closed-loop grip scenario parameters. Torques are N·mm about the cap axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControlConfig {
    pub initial_force: f64,
    pub force_step: f64,
    pub max_force: f64,
    /// Frames the gripper holds still after each force increase.
    pub pause_frames: usize,
    pub rest_frames: usize,
    pub max_frames: usize,
    /// Largest gripper rotation per frame, rad.
    pub gripper_step: f64,
    /// Screwing resistance growth per frame of motion.
    pub screw_torque_rate: f64,
    /// Seeded relative spread of the screwing rate between repetitions.
    pub rate_jitter: f64,
    /// The tight cap breaks free at the torque capacity of this grip force.
    pub breakaway_grip_force: f64,
    /// Slip-free frames after breakaway that end an unscrew run.
    pub dwell_frames: usize,
    pub cap: ObjectSpec,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            initial_force: 10.0,
            force_step: 10.0,
            max_force: 60.0,
            pause_frames: 3,
            rest_frames: 3,
            max_frames: 600,
            gripper_step: 0.02,
            screw_torque_rate: 6.0,
            rate_jitter: 0.1,
            breakaway_grip_force: 25.0,
            dwell_frames: 60,
            cap: ObjectSpec {
                name: "bottle_cap".into(),
                shape: PatchShape::Disk { radius: 8.0 },
                profile: PressureProfile::Dome,
                friction: 0.9,
                peak_load: 1.0,
                texture_strength: 1.0,
                centre: Vec2::new(20.75, 15.75),
            },
        }
    }
}

impl ControlConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.initial_force > 0.0
            && self.force_step > 0.0
            && self.max_force >= self.initial_force
            && self.gripper_step > 0.0
            && self.screw_torque_rate > 0.0
            && (0.0..1.0).contains(&self.rate_jitter)
            && self.breakaway_grip_force > 0.0
            && self.max_frames > self.rest_frames
            && self.dwell_frames > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("control: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LatencyConfig {
    /// Timed step() calls per patch size.
    pub frames: usize,
    pub small_markers: usize,
    /// Per-frame budget, ms.
    pub budget_ms: f64,
}

impl Default for LatencyConfig {
    fn default() -> Self {
        Self {
            frames: 1000,
            small_markers: 100,
            budget_ms: 41.6,
        }
    }
}
