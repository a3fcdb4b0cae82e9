use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use tactile_slip::{MarkerObservation, Vec2};

use crate::error::{Error, Result};
use crate::model::GelModel;
use crate::object::ObjectSpec;
use crate::script::{LoadFrame, LoadScript};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkerState {
    Stuck,
    Slipping,
    OutOfContact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameLabel {
    NoSlip,
    IncipientSlip,
    GrossSlip,
}

impl FrameLabel {
    fn from_counts(slipping: usize, contact: usize) -> Self {
        if slipping == 0 {
            FrameLabel::NoSlip
        } else if slipping < contact {
            FrameLabel::IncipientSlip
        } else {
            FrameLabel::GrossSlip
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthFrame {
    pub index: u64,
    /// Observed marker positions, noise included, mm.
    pub positions: Vec<Vec2>,
    /// Noise-free marker displacement from rest, mm.
    pub displacements: Vec<Vec2>,
    pub states: Vec<MarkerState>,
    pub pose: LoadFrame,
    pub label: FrameLabel,
    /// Whether the imprint is strong enough for the sensor to register the
    /// contact. Mechanics do not depend on it; observations do.
    #[serde(default = "visible_default")]
    pub contact_visible: bool,
}

fn visible_default() -> bool {
    true
}

impl GroundTruthFrame {
    pub fn contact_count(&self) -> usize {
        self.states
            .iter()
            .filter(|&&s| s != MarkerState::OutOfContact)
            .count()
    }

    pub fn slipping_count(&self) -> usize {
        self.states
            .iter()
            .filter(|&&s| s == MarkerState::Slipping)
            .count()
    }

    /// Marker observations as a tracker would report them; ids are grid
    /// indices starting at 1. Nothing is in contact when the contact does not
    /// register.
    pub fn observations(&self, model: &GelModel) -> Vec<MarkerObservation> {
        let r = model.render.marker_radius_px;
        let area = (std::f64::consts::PI * r * r).round() as u32;
        self.positions
            .iter()
            .zip(&self.states)
            .enumerate()
            .map(|(i, (&position, &state))| MarkerObservation {
                id: i as u32 + 1,
                position,
                area_px: area,
                in_contact: self.contact_visible && state != MarkerState::OutOfContact,
            })
            .collect()
    }
}

/// Incremental simulation: one [`GroundTruthFrame`] per pose, each pose
/// checked against the previous one.
///
/// A marker in contact is a spring of stiffness `k` attached to the object.
/// Its trial displacement is the object's displacement at the attachment
/// point minus the slip accumulated so far; when `k·|u|` would exceed
/// `μ·p_i` the displacement is clamped to that limit and the attachment
/// point slides. Markers off the patch rest, and reattach wherever the
/// object is when they come back into contact.
#[derive(Debug, Clone)]
pub struct GelSimulation {
    model: GelModel,
    obj: ObjectSpec,
    rest: Vec<Vec2>,
    base: Vec<Option<f64>>,
    patch: Vec<Vec2>,
    slip_offset: Vec<Vec2>,
    rng: ChaCha8Rng,
    noise: Normal<f64>,
    previous: LoadFrame,
    next_index: u64,
}

impl GelSimulation {
    pub fn new(model: &GelModel, obj: &ObjectSpec, seed: u64) -> Result<Self> {
        model.validate()?;
        obj.validate()?;
        let rest = model.rest_positions();
        let base: Vec<Option<f64>> = rest.iter().map(|&p| obj.base_load(p)).collect();
        let patch = rest
            .iter()
            .zip(&base)
            .filter(|(_, b)| b.is_some())
            .map(|(&p, _)| p)
            .collect();
        let noise = Normal::new(0.0, model.noise_sigma)
            .map_err(|e| Error::InvalidModel(format!("noise: {e}")))?;
        Ok(Self {
            model: model.clone(),
            obj: obj.clone(),
            slip_offset: vec![Vec2::ZERO; rest.len()],
            rest,
            base,
            patch,
            rng: ChaCha8Rng::seed_from_u64(seed),
            noise,
            previous: LoadFrame::rest(1.0),
            next_index: 0,
        })
    }

    pub fn model(&self) -> &GelModel {
        &self.model
    }

    pub fn object(&self) -> &ObjectSpec {
        &self.obj
    }

    /// Pose of the last simulated frame (rest before the first).
    pub fn pose(&self) -> LoadFrame {
        self.previous
    }

    /// Advances to `pose`. Fails without changing state when the pose is
    /// invalid or moves a patch point more than half a pitch.
    pub fn step(&mut self, pose: LoadFrame) -> Result<GroundTruthFrame> {
        let k = self.next_index as usize;
        check_pose(&self.model, &self.obj, &self.patch, &self.previous, &pose, k)?;
        let model = &self.model;
        let obj = &self.obj;
        let visible = model.contact_visible(obj.texture_strength, pose.force);
        let scale = model.load_scale(pose.force);
        let mut displacements = Vec::with_capacity(self.rest.len());
        let mut states = Vec::with_capacity(self.rest.len());
        for (i, &p) in self.rest.iter().enumerate() {
            let target = pose.target(obj.centre, p);
            let (u, state) = match self.base[i] {
                Some(load) => {
                    let cap = obj.friction * load * scale / model.shear_stiffness;
                    let trial = target - self.slip_offset[i];
                    let len = trial.norm();
                    if len <= cap * (1.0 + 1e-12) {
                        (trial, MarkerState::Stuck)
                    } else {
                        let u = trial * (cap / len);
                        self.slip_offset[i] = target - u;
                        (u, MarkerState::Slipping)
                    }
                }
                None => {
                    self.slip_offset[i] = target;
                    (Vec2::ZERO, MarkerState::OutOfContact)
                }
            };
            displacements.push(u);
            states.push(state);
        }
        let positions = self
            .rest
            .iter()
            .zip(&displacements)
            .map(|(&p, &u)| {
                p + u + Vec2::new(self.noise.sample(&mut self.rng), self.noise.sample(&mut self.rng))
            })
            .collect();
        let contact = states.iter().filter(|&&s| s != MarkerState::OutOfContact).count();
        let slipping = states.iter().filter(|&&s| s == MarkerState::Slipping).count();
        self.previous = pose;
        self.next_index += 1;
        Ok(GroundTruthFrame {
            index: k as u64,
            positions,
            displacements,
            states,
            pose,
            label: FrameLabel::from_counts(slipping, contact),
            contact_visible: visible,
        })
    }
}

pub(crate) fn check_pose(
    model: &GelModel,
    obj: &ObjectSpec,
    patch: &[Vec2],
    prev: &LoadFrame,
    f: &LoadFrame,
    frame: usize,
) -> Result<()> {
    let fail = |reason: String| Error::InvalidScript { frame, reason };
    if !f.translation.is_finite() || !f.rotation.is_finite() || !f.force.is_finite() {
        return Err(fail("non-finite pose or force".into()));
    }
    if !(f.force > 0.0) {
        return Err(fail(format!("normal force {} N", f.force)));
    }
    let limit = 0.5 * model.pitch;
    let step = patch
        .iter()
        .map(|&p| (f.target(obj.centre, p) - prev.target(obj.centre, p)).norm())
        .fold(0.0, f64::max);
    if step > limit {
        return Err(fail(format!("moves a marker {step:.3} mm, limit {limit} mm")));
    }
    Ok(())
}

/// Runs `script` and returns one ground-truth frame per script frame.
pub fn simulate(
    model: &GelModel,
    obj: &ObjectSpec,
    script: &LoadScript,
    seed: u64,
) -> Result<Vec<GroundTruthFrame>> {
    script.validate(model, obj)?;
    let mut sim = GelSimulation::new(model, obj, seed)?;
    script.frames.iter().map(|&pose| sim.step(pose)).collect()
}

/// Largest friction torque about the patch centre the contact can hold at
/// normal force `force`, N·mm.
pub fn torque_capacity(model: &GelModel, obj: &ObjectSpec, force: f64) -> f64 {
    let scale = model.load_scale(force);
    model
        .rest_positions()
        .into_iter()
        .filter_map(|p| obj.base_load(p).map(|load| obj.friction * load * scale * (p - obj.centre).norm()))
        .sum()
}
