use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tactile_slip::Vec2;

use crate::model::GelModel;
use crate::object::{ObjectSpec, PatchShape, PressureProfile};
use crate::script::{LoadFrame, LoadScript};

const FORCES: [f64; 3] = [5.0, 15.0, 30.0];
const REST_FRAMES: usize = 3;
const RAMP_FRAMES: usize = 30;
const HOLD_FRAMES: usize = 5;
/// Patch centre: the middle of a grid cell, so patch edges can sit between
/// marker rings.
const CENTRE: Vec2 = Vec2::new(20.75, 15.75);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialLabel {
    Slip,
    NoSlip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrialKind {
    /// Tangential push along `direction` (rad).
    Push { direction: f64 },
    /// Rotation about the patch centre; `direction` is +1 or −1.
    Twist { direction: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub object: ObjectSpec,
    /// Index within the object's 24 trials.
    pub trial_id: usize,
    pub kind: TrialKind,
    pub label: TrialLabel,
    pub force: f64,
    pub script: LoadScript,
    pub sim_seed: u64,
    pub texture_seed: u64,
}

impl Trial {
    pub fn name(&self) -> String {
        format!("{}_{:02}", self.object.name, self.trial_id)
    }
}

fn object(name: &str, shape: PatchShape, profile: PressureProfile, friction: f64, peak_load: f64, texture: f64) -> ObjectSpec {
    ObjectSpec {
        name: name.to_owned(),
        shape,
        profile,
        friction,
        peak_load,
        texture_strength: texture,
        centre: CENTRE,
    }
}

/// The ten benchmark objects. Disk and annulus radii fall between marker
/// rings and rectangle edges between marker columns, so no marker sits on a
/// patch boundary.
pub fn benchmark_objects() -> Vec<ObjectSpec> {
    use PatchShape::*;
    use PressureProfile::*;
    vec![
        object("rubber_puck", Disk { radius: 8.0 }, Dome, 1.2, 0.70, 1.0),
        object("plastic_lid", Disk { radius: 9.3 }, Dome, 0.5, 1.70, 0.6),
        object("glass_jar", Disk { radius: 8.0 }, Dome, 0.3, 2.80, 0.35),
        object("wood_block", Rectangle { width: 18.0, height: 15.0 }, Dome, 0.6, 1.40, 0.8),
        object("steel_bar", Rectangle { width: 18.0, height: 12.0 }, Uniform, 0.2, 4.20, 0.25),
        object("foam_sponge", Disk { radius: 9.3 }, Dome, 1.0, 0.85, 0.05),
        object("card_box", Rectangle { width: 18.0, height: 15.0 }, Dome, 0.45, 1.90, 0.06),
        object("ceramic_cup", Annulus { inner_radius: 0.9, outer_radius: 8.8 }, Dome, 0.7, 1.20, 0.5),
        object("silicone_ring", Annulus { inner_radius: 0.9, outer_radius: 10.2 }, Dome, 1.1, 0.77, 0.7),
        object("metal_can", Disk { radius: 10.2 }, Dome, 0.25, 3.40, 0.2),
    ]
}

/// (rest-relative position, Coulomb limit in mm) of every patch marker at
/// `force`, whether or not the contact registers.
fn caps(model: &GelModel, obj: &ObjectSpec, force: f64) -> Vec<(Vec2, f64)> {
    let scale = model.load_scale(force);
    model
        .rest_positions()
        .into_iter()
        .filter_map(|p| {
            obj.base_load(p)
                .map(|load| (p - obj.centre, obj.friction * load * scale / model.shear_stiffness))
        })
        .collect()
}

/// Rotation at which a stuck marker at distance `r` reaches its limit.
fn onset_angle(d: Vec2, cap: f64) -> f64 {
    let r = d.norm();
    if r == 0.0 || cap >= 2.0 * r {
        std::f64::consts::PI
    } else {
        2.0 * (cap / (2.0 * r)).asin()
    }
}

fn ramp(force: f64, end: LoadFrame) -> LoadScript {
    let mut frames = vec![LoadFrame::rest(force); REST_FRAMES];
    for k in 1..=RAMP_FRAMES {
        let t = k as f64 / RAMP_FRAMES as f64;
        frames.push(LoadFrame {
            translation: end.translation * t,
            rotation: end.rotation * t,
            force,
        });
    }
    frames.extend(std::iter::repeat_n(end, HOLD_FRAMES));
    LoadScript::new(frames)
}

fn push_script(model: &GelModel, obj: &ObjectSpec, force: f64, direction: f64, slip: bool) -> LoadScript {
    let c = caps(model, obj, force);
    let reach = if slip {
        1.15 * c.iter().map(|x| x.1).fold(0.0, f64::max)
    } else {
        0.8 * c.iter().map(|x| x.1).fold(f64::INFINITY, f64::min)
    };
    let end = LoadFrame {
        translation: Vec2::new(direction.cos(), direction.sin()) * reach,
        rotation: 0.0,
        force,
    };
    ramp(force, end)
}

fn twist_script(model: &GelModel, obj: &ObjectSpec, force: f64, direction: f64, slip: bool) -> LoadScript {
    let mut onsets: Vec<f64> = caps(model, obj, force)
        .into_iter()
        .map(|(d, cap)| onset_angle(d, cap))
        .collect();
    onsets.sort_by(f64::total_cmp);
    let angle = if slip {
        (1.6 * onsets[onsets.len() / 4]).min(0.35)
    } else {
        0.8 * onsets[0]
    };
    let end = LoadFrame {
        translation: Vec2::ZERO,
        rotation: direction * angle,
        force,
    };
    ramp(force, end)
}

/// 10 objects × 24 trials. Per object and force level (5, 15, 30 N): four
/// pushes 90° apart and two opposite twists that end in slip, plus one push
/// and one twist that stop short of any marker slipping.
pub fn benchmark_suite(seed: u64) -> Vec<Trial> {
    let model = GelModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trials = Vec::with_capacity(240);
    for obj in benchmark_objects() {
        let texture_seed = rng.random();
        let offset = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
        let mut specs = Vec::new();
        for &force in &FORCES {
            for q in 0..4 {
                let direction = offset + q as f64 * std::f64::consts::FRAC_PI_2;
                specs.push((TrialKind::Push { direction }, TrialLabel::Slip, force));
            }
            for direction in [1.0, -1.0] {
                specs.push((TrialKind::Twist { direction }, TrialLabel::Slip, force));
            }
        }
        for &force in &FORCES {
            let direction = rng.random_range(0.0..std::f64::consts::TAU);
            specs.push((TrialKind::Push { direction }, TrialLabel::NoSlip, force));
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            specs.push((TrialKind::Twist { direction: sign }, TrialLabel::NoSlip, force));
        }
        for (trial_id, (kind, label, force)) in specs.into_iter().enumerate() {
            let slip = label == TrialLabel::Slip;
            let script = match kind {
                TrialKind::Push { direction } => push_script(&model, &obj, force, direction, slip),
                TrialKind::Twist { direction } => twist_script(&model, &obj, force, direction, slip),
            };
            trials.push(Trial {
                object: obj.clone(),
                trial_id,
                kind,
                label,
                force,
                script,
                sim_seed: rng.random(),
                texture_seed,
            });
        }
    }
    trials
}
