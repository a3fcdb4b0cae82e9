//! Wall time of detector `step()` on full-sensor and small contact patches.

use std::time::Instant;

use gelsim::{GelSimulation, LoadFrame, ObjectSpec, PatchShape, PressureProfile};
use serde::{Deserialize, Serialize};
use tactile_slip::{DecisionRecord, FrameSnapshot, SlipDetector, Vec2};

use crate::config::HarnessConfig;
use crate::error::Result;

/// Largest twist of the ping-pong motion, rad.
const TWIST_AMPLITUDE: f64 = 0.02;
/// Frames per half period.
const HALF_PERIOD: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepTiming {
    pub markers: usize,
    pub frames: usize,
    pub median_ms: f64,
    pub p95_ms: f64,
    pub max_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub full: StepTiming,
    pub small: StepTiming,
    pub budget_ms: f64,
    pub within_budget: bool,
    pub small_faster: bool,
}

/// Timing plus the decisions made, which do not depend on timing.
#[derive(Debug, Clone)]
pub struct LatencyRun {
    pub report: LatencyReport,
    pub full_decisions: Vec<DecisionRecord>,
    pub small_decisions: Vec<DecisionRecord>,
}

/// A sticky flat object covering every marker of the grid.
pub fn full_patch(cfg: &HarnessConfig) -> ObjectSpec {
    let m = &cfg.model;
    let span = Vec2::new(m.pitch * (m.cols - 1) as f64, m.pitch * (m.rows - 1) as f64);
    patch("full_cover", m.origin + span * 0.5, span + Vec2::new(m.pitch, m.pitch))
}

/// A sticky flat object covering a central `n × n` block of markers,
/// `n = round(sqrt(markers))`.
pub fn block_patch(cfg: &HarnessConfig, markers: usize) -> ObjectSpec {
    let m = &cfg.model;
    let n = ((markers as f64).sqrt().round() as usize).clamp(1, m.rows.min(m.cols));
    let (i0, j0) = ((m.rows - n) / 2, (m.cols - n) / 2);
    let first = m.origin + Vec2::new(m.pitch * j0 as f64, m.pitch * i0 as f64);
    let side = m.pitch * (n - 1) as f64;
    patch("center_block", first + Vec2::new(side, side) * 0.5, Vec2::new(side + m.pitch, side + m.pitch))
}

fn patch(name: &str, centre: Vec2, size: Vec2) -> ObjectSpec {
    ObjectSpec {
        name: name.into(),
        shape: PatchShape::Rectangle {
            width: size.x,
            height: size.y,
        },
        profile: PressureProfile::Uniform,
        friction: 1.0,
        peak_load: 2.0,
        texture_strength: 1.0,
        centre,
    }
}

fn twist_at(k: usize) -> f64 {
    let phase = k % (2 * HALF_PERIOD);
    let t = if phase < HALF_PERIOD {
        phase as f64 / HALF_PERIOD as f64
    } else {
        2.0 - phase as f64 / HALF_PERIOD as f64
    };
    TWIST_AMPLITUDE * (2.0 * t - 1.0)
}

/// Simulated frames of `obj` under a slow back-and-forth twist, keeping only
/// the markers on the patch.
pub fn twist_frames(cfg: &HarnessConfig, obj: &ObjectSpec, count: usize, seed: u64) -> Result<Vec<FrameSnapshot>> {
    let mut sim = GelSimulation::new(&cfg.model, obj, seed)?;
    (0..count)
        .map(|k| {
            let gt = sim.step(LoadFrame {
                translation: Vec2::ZERO,
                rotation: if k == 0 { 0.0 } else { twist_at(k) - twist_at(0) },
                force: 10.0,
            })?;
            let markers = gt.observations(&cfg.model).into_iter().filter(|m| m.in_contact).collect();
            Ok(FrameSnapshot::from_markers(gt.index, cfg.model.geometry, markers, &cfg.marker_mask))
        })
        .collect()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let i = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[i]
}

/// Times `step()` over every frame after the first, which is the reference.
pub fn time_steps(cfg: &HarnessConfig, frames: &[FrameSnapshot]) -> Result<(StepTiming, Vec<DecisionRecord>)> {
    let mut detector = SlipDetector::new(cfg.detector.clone())?;
    detector.set_reference(&frames[0]);
    let mut times = Vec::with_capacity(frames.len());
    let mut records = Vec::with_capacity(frames.len());
    for f in &frames[1..] {
        let t0 = Instant::now();
        let d = detector.step(f)?;
        times.push(t0.elapsed().as_secs_f64() * 1e3);
        records.push(d.record());
    }
    times.sort_by(f64::total_cmp);
    Ok((
        StepTiming {
            markers: frames[0].markers.len(),
            frames: times.len(),
            median_ms: quantile(&times, 0.5),
            p95_ms: quantile(&times, 0.95),
            max_ms: times[times.len() - 1],
        },
        records,
    ))
}

pub fn bench_latency(cfg: &HarnessConfig, seed: u64) -> Result<LatencyRun> {
    let n = cfg.latency.frames + 1;
    let full_frames = twist_frames(cfg, &full_patch(cfg), n, seed)?;
    let small_frames = twist_frames(cfg, &block_patch(cfg, cfg.latency.small_markers), n, seed)?;
    let (full, full_decisions) = time_steps(cfg, &full_frames)?;
    let (small, small_decisions) = time_steps(cfg, &small_frames)?;
    Ok(LatencyRun {
        report: LatencyReport {
            within_budget: full.median_ms < cfg.latency.budget_ms,
            small_faster: small.median_ms < full.median_ms,
            budget_ms: cfg.latency.budget_ms,
            full,
            small,
        },
        full_decisions,
        small_decisions,
    })
}
