//! Closed-loop grip force simulation for screwing and unscrewing a cap.
//!
//! The gripper holds a cap against the gel and turns it. `twist` is the
//! rotation of the cap relative to the sensor, which is what the simulator
//! sees as the object pose. Each frame the detector looks at the marker
//! field; on IncipientSlip the gripper stops for a few frames and the grip
//! force goes up one step.
//!
//! Screwing: the thread resistance grows with every frame of motion. While
//! the gel can hold it the twist follows the resistance through the stuck
//! torsional stiffness `k·Σr²`; beyond the torque capacity the gripper turns
//! over the cap. The run ends once the force reaches its maximum.
//!
//! Unscrewing: the cap is stuck until the gel transmits the breakaway
//! torque; before that the gripper turns over it. After breakaway the cap
//! follows the gripper and the twist stays put. The run ends after a dwell
//! without slip.

use gelsim::{torque_capacity, GelSimulation, GroundTruthFrame, LoadFrame, MarkerState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tactile_slip::{FrameSnapshot, SlipDetector, Verdict};

use crate::config::{ControlConfig, HarnessConfig};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Screw,
    Unscrew,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Screwing,
    Unscrewing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlipEvent {
    pub frame: u64,
    pub force_before: f64,
    pub force_after: f64,
    pub slipped_markers: usize,
}

/// Force stepping state. The force starts at `force_min`, only moves up in
/// `force_step` increments and is clamped at `force_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GripControllerState {
    pub force: f64,
    pub force_min: f64,
    pub force_step: f64,
    pub force_max: f64,
    pub phase: Phase,
    pub slip_event_log: Vec<SlipEvent>,
    /// Frames left in the current pause.
    pub pause_left: usize,
}

impl GripControllerState {
    pub fn new(cfg: &ControlConfig, phase: Phase) -> Self {
        Self {
            force: cfg.initial_force,
            force_min: cfg.initial_force,
            force_step: cfg.force_step,
            force_max: cfg.max_force,
            phase,
            slip_event_log: Vec::new(),
            pause_left: 0,
        }
    }

    pub fn paused(&self) -> bool {
        self.pause_left > 0
    }

    pub fn at_max(&self) -> bool {
        self.force >= self.force_max
    }

    /// Reacts to one verdict. Slip while paused is the tail of the event
    /// already handled and is ignored. Returns whether the force was raised.
    pub fn on_verdict(&mut self, frame: u64, verdict: Verdict, slipped: usize, pause_frames: usize) -> bool {
        if self.paused() {
            self.pause_left -= 1;
            return false;
        }
        if verdict != Verdict::IncipientSlip || self.at_max() {
            return false;
        }
        let before = self.force;
        self.force = (self.force + self.force_step).min(self.force_max);
        self.pause_left = pause_frames;
        self.slip_event_log.push(SlipEvent {
            frame,
            force_before: before,
            force_after: self.force,
            slipped_markers: slipped,
        });
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The grip force reached its maximum.
    MaxForce,
    /// The cap turned freely for the dwell period.
    Dwell,
    /// Frame limit reached first.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFrame {
    pub frame: u64,
    /// Grip force applied in this frame, N.
    pub force: f64,
    /// Cap rotation relative to the sensor, rad.
    pub twist: f64,
    /// Torque the gel transmits, N·mm.
    pub gel_torque: f64,
    /// Thread resistance (screwing) or breakaway torque (unscrewing), N·mm.
    pub load_torque: f64,
    pub verdict: Option<Verdict>,
    pub paused: bool,
    pub gt_slipping: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlTrace {
    pub scenario: Scenario,
    pub seed: u64,
    /// Resistance growth per frame of motion after jitter, N·mm.
    pub torque_rate: f64,
    pub frames: Vec<TraceFrame>,
    pub events: Vec<SlipEvent>,
    pub final_force: f64,
    pub termination: Termination,
    pub stalled: bool,
}

impl ControlTrace {
    /// Force at the start of the run followed by the force after each event.
    pub fn force_steps(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.frames.first().map(|f| f.force).into_iter().collect();
        out.extend(self.events.iter().map(|e| e.force_after));
        out
    }

    pub fn first_slip_frame(&self) -> Option<u64> {
        self.events.first().map(|e| e.frame)
    }
}

/// Stuck torsional stiffness of the cap contact, N·mm/rad.
pub fn torsional_stiffness(cfg: &HarnessConfig) -> f64 {
    let cap = &cfg.control.cap;
    let model = &cfg.model;
    model
        .rest_positions()
        .into_iter()
        .filter(|&p| cap.base_load(p).is_some())
        .map(|p| model.shear_stiffness * (p - cap.centre).norm_squared())
        .sum()
}

fn gel_torque(frame: &GroundTruthFrame, cfg: &HarnessConfig) -> f64 {
    let cap = &cfg.control.cap;
    cfg.model
        .rest_positions()
        .into_iter()
        .zip(&frame.displacements)
        .zip(&frame.states)
        .filter(|(_, &s)| s != MarkerState::OutOfContact)
        .map(|((p, &u), _)| cfg.model.shear_stiffness * (p - cap.centre).cross(u))
        .sum()
}

pub fn run_control_loop(scenario: Scenario, cfg: &HarnessConfig, seed: u64) -> Result<ControlTrace> {
    cfg.validate()?;
    let c = &cfg.control;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let torque_rate = c.screw_torque_rate * (1.0 + c.rate_jitter * rng.random_range(-1.0..=1.0));
    let mut sim = GelSimulation::new(&cfg.model, &c.cap, rng.random())?;
    let mut detector = SlipDetector::new(cfg.detector.clone())?;
    let phase = match scenario {
        Scenario::Screw => Phase::Screwing,
        Scenario::Unscrew => Phase::Unscrewing,
    };
    let mut state = GripControllerState::new(c, phase);
    let stiffness = torsional_stiffness(cfg);
    let breakaway = torque_capacity(&cfg.model, &c.cap, c.breakaway_grip_force);

    let mut twist = 0.0;
    let mut resistance = 0.0;
    let mut broken_free = false;
    let mut quiet = 0usize;
    let mut frames = Vec::new();
    let mut termination = Termination::Stalled;

    for k in 0..c.max_frames {
        let moving = k >= c.rest_frames && !state.paused();
        if moving {
            match scenario {
                Scenario::Screw => {
                    resistance += torque_rate;
                    twist += if resistance > torque_capacity(&cfg.model, &c.cap, state.force) {
                        c.gripper_step
                    } else {
                        (torque_rate / stiffness).min(c.gripper_step)
                    };
                }
                Scenario::Unscrew if !broken_free => twist += c.gripper_step,
                Scenario::Unscrew => {}
            }
        }
        let gt = sim.step(LoadFrame {
            translation: tactile_slip::Vec2::ZERO,
            rotation: twist,
            force: state.force,
        })?;
        let torque = gel_torque(&gt, cfg);
        let snap = FrameSnapshot::from_markers(
            gt.index,
            cfg.model.geometry,
            gt.observations(&cfg.model),
            &cfg.marker_mask,
        );
        let paused = state.paused();
        let force = state.force;
        let verdict = if k == 0 {
            detector.set_reference(&snap);
            None
        } else {
            let d = detector.step(&snap)?;
            state.on_verdict(gt.index, d.verdict, d.slipped_ids.len(), c.pause_frames);
            Some(d.verdict)
        };
        frames.push(TraceFrame {
            frame: gt.index,
            force,
            twist,
            gel_torque: torque,
            load_torque: match scenario {
                Scenario::Screw => resistance,
                Scenario::Unscrew => breakaway,
            },
            verdict,
            paused,
            gt_slipping: gt.slipping_count(),
        });

        if scenario == Scenario::Screw && state.at_max() {
            termination = Termination::MaxForce;
            break;
        }
        if scenario == Scenario::Unscrew {
            if !broken_free && torque.abs() >= breakaway {
                broken_free = true;
            }
            if broken_free {
                quiet = if verdict == Some(Verdict::IncipientSlip) { 0 } else { quiet + 1 };
                if quiet >= c.dwell_frames {
                    termination = Termination::Dwell;
                    break;
                }
            }
            if state.at_max() && state.slip_event_log.last().is_some_and(|e| e.frame == gt.index) {
                termination = Termination::MaxForce;
                break;
            }
        }
    }
    Ok(ControlTrace {
        scenario,
        seed,
        torque_rate,
        final_force: state.force,
        events: state.slip_event_log,
        stalled: termination == Termination::Stalled,
        termination,
        frames,
    })
}
