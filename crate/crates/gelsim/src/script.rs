use serde::{Deserialize, Serialize};
use tactile_slip::Vec2;

use crate::error::Result;
use crate::sim::check_pose;
use crate::model::GelModel;
use crate::object::ObjectSpec;

/// Object pose and normal force for one frame. The pose is relative to the
/// object's initial placement; rotation is about the patch centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadFrame {
    /// mm
    pub translation: Vec2,
    /// rad, counterclockwise
    pub rotation: f64,
    /// N
    pub force: f64,
}

impl LoadFrame {
    pub fn rest(force: f64) -> Self {
        Self {
            translation: Vec2::ZERO,
            rotation: 0.0,
            force,
        }
    }

    /// Where the object carries the material point that started at `rest`,
    /// as a displacement from `rest`.
    pub fn target(&self, centre: Vec2, rest: Vec2) -> Vec2 {
        let d = rest - centre;
        d.rotated(self.rotation) - d + self.translation
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadScript {
    pub frames: Vec<LoadFrame>,
}

impl LoadScript {
    pub fn new(frames: Vec<LoadFrame>) -> Self {
        Self { frames }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Rejects non-finite frames and any frame that moves a patch point by
    /// more than half a marker pitch.
    pub fn validate(&self, model: &GelModel, obj: &ObjectSpec) -> Result<()> {
        let patch: Vec<Vec2> = model
            .rest_positions()
            .into_iter()
            .filter(|&p| obj.shape.contains(p - obj.centre))
            .collect();
        let mut prev = LoadFrame::rest(1.0);
        for (k, f) in self.frames.iter().enumerate() {
            check_pose(model, obj, &patch, &prev, f, k)?;
            prev = *f;
        }
        Ok(())
    }
}
