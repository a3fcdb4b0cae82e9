use serde::{Deserialize, Serialize};
use tactile_slip::Vec2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PatchShape {
    Disk { radius: f64 },
    Rectangle { width: f64, height: f64 },
    Annulus { inner_radius: f64, outer_radius: f64 },
}

impl PatchShape {
    /// Normalized radial coordinate: 0 at the centre, 1 on the outer edge.
    pub fn rho(&self, d: Vec2) -> f64 {
        match *self {
            PatchShape::Disk { radius } => d.norm() / radius,
            PatchShape::Rectangle { width, height } => {
                (2.0 * d.x.abs() / width).max(2.0 * d.y.abs() / height)
            }
            PatchShape::Annulus { outer_radius, .. } => d.norm() / outer_radius,
        }
    }

    /// Whether the offset `d` from the patch centre lies on the patch.
    pub fn contains(&self, d: Vec2) -> bool {
        match *self {
            PatchShape::Annulus { inner_radius, .. } if d.norm() < inner_radius => false,
            _ => self.rho(d) <= 1.0,
        }
    }

    pub fn outer_extent(&self) -> f64 {
        match *self {
            PatchShape::Disk { radius } => radius,
            PatchShape::Rectangle { width, height } => 0.5 * width.hypot(height),
            PatchShape::Annulus { outer_radius, .. } => outer_radius,
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        let ok = match *self {
            PatchShape::Disk { radius } => radius > 0.0,
            PatchShape::Rectangle { width, height } => width > 0.0 && height > 0.0,
            PatchShape::Annulus {
                inner_radius,
                outer_radius,
            } => inner_radius > 0.0 && outer_radius > inner_radius,
        };
        if ok {
            Ok(())
        } else {
            Err(format!("bad dimensions {self:?}"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureProfile {
    /// `p0·√(1 − ρ²)`
    Dome,
    Uniform,
}

impl PressureProfile {
    pub fn factor(self, rho: f64) -> f64 {
        match self {
            PressureProfile::Dome => (1.0 - rho * rho).max(0.0).sqrt(),
            PressureProfile::Uniform => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub name: String,
    pub shape: PatchShape,
    pub profile: PressureProfile,
    /// Coulomb friction coefficient μ.
    pub friction: f64,
    /// Peak normal load on one marker at the model's reference force, N.
    pub peak_load: f64,
    /// 0 renders no imprint at all; 1 is a strongly textured surface.
    pub texture_strength: f64,
    /// Patch centre on the sensor, mm.
    pub centre: Vec2,
}

impl ObjectSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Error::InvalidObject {
            name: self.name.clone(),
            reason,
        };
        self.shape.validate().map_err(fail)?;
        if !(self.friction > 0.0) || !(self.peak_load > 0.0) {
            return Err(fail("friction and peak load must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.texture_strength) {
            return Err(fail(format!("texture strength {}", self.texture_strength)));
        }
        if !self.centre.is_finite() {
            return Err(fail("centre".into()));
        }
        Ok(())
    }

    /// Normal load on a marker resting at `rest`, at the reference force.
    pub fn base_load(&self, rest: Vec2) -> Option<f64> {
        let d = rest - self.centre;
        self.shape
            .contains(d)
            .then(|| self.peak_load * self.profile.factor(self.shape.rho(d)))
    }
}
