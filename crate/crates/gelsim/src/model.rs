use serde::{Deserialize, Serialize};
use tactile_slip::{SensorGeometry, Vec2};

use crate::error::{Error, Result};

/// Appearance of rendered frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderParams {
    pub marker_radius_px: f64,
    pub background: u8,
    pub marker_intensity: u8,
    /// Imprint brightening per newton of normal force at texture strength 1.
    pub imprint_gain: f64,
    pub imprint_max: f64,
    /// Fraction of the imprint contrast modulated by texture.
    pub texture_depth: f64,
    /// Texture lattice spacing, pixels.
    pub texture_cell_px: f64,
    pub supersample: usize,
}

impl Default for RenderParams {
    fn default() -> Self {
        Self {
            marker_radius_px: 3.0,
            background: 128,
            marker_intensity: 30,
            imprint_gain: 70.0,
            imprint_max: 80.0,
            texture_depth: 1.0,
            texture_cell_px: 2.0,
            supersample: 4,
        }
    }
}

/// Gel, marker grid and sensor description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GelModel {
    pub geometry: SensorGeometry,
    /// mm
    pub pitch: f64,
    pub rows: usize,
    pub cols: usize,
    /// Rest position of marker (row 0, col 0), mm.
    pub origin: Vec2,
    /// Per-marker shear stiffness, N/mm.
    pub shear_stiffness: f64,
    /// Standard deviation of the position noise added to outputs, mm.
    pub noise_sigma: f64,
    /// Normal force at which an object's `peak_load` is quoted, N.
    pub reference_force: f64,
    /// Per-marker load grows as `(F / reference_force)^force_exponent`;
    /// the remainder of the force goes into patch area.
    pub force_exponent: f64,
    /// Smallest imprint contrast at which the contact registers at all.
    pub visibility_contrast: f64,
    pub render: RenderParams,
}

impl Default for GelModel {
    fn default() -> Self {
        Self {
            geometry: SensorGeometry::default(),
            pitch: 1.5,
            rows: 19,
            cols: 25,
            origin: Vec2::new(2.0, 1.5),
            shear_stiffness: 0.8,
            noise_sigma: 0.01,
            reference_force: 10.0,
            force_exponent: 1.0 / 3.0,
            visibility_contrast: 35.0,
            render: RenderParams::default(),
        }
    }
}

impl GelModel {
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        let bad = |msg: &str| Err(Error::InvalidModel(msg.to_owned()));
        if !(self.pitch > 0.0) || !(self.shear_stiffness > 0.0) {
            return bad("pitch and shear stiffness must be positive");
        }
        if self.rows == 0 || self.cols == 0 {
            return bad("empty marker grid");
        }
        if !(self.noise_sigma >= 0.0) || !(self.reference_force > 0.0) || !self.force_exponent.is_finite() {
            return bad("noise, reference force and force exponent must be finite and non-negative");
        }
        let far = self.origin
            + Vec2::new(self.pitch * (self.cols - 1) as f64, self.pitch * (self.rows - 1) as f64);
        if !self.geometry.contains(self.origin) || !self.geometry.contains(far) {
            return bad("marker grid does not fit on the sensor");
        }
        if self.render.supersample == 0 || !(self.render.marker_radius_px > 0.0) {
            return bad("render parameters");
        }
        Ok(())
    }

    pub fn marker_count(&self) -> usize {
        self.rows * self.cols
    }

    /// Rest positions, row-major from `origin`.
    pub fn rest_positions(&self) -> Vec<Vec2> {
        let mut out = Vec::with_capacity(self.marker_count());
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.push(self.origin + Vec2::new(self.pitch * j as f64, self.pitch * i as f64));
            }
        }
        out
    }

    /// Multiplier applied to per-marker loads at normal force `force`.
    pub fn load_scale(&self, force: f64) -> f64 {
        (force / self.reference_force).powf(self.force_exponent)
    }

    /// Rendered imprint contrast for an object of the given texture strength.
    pub fn imprint_contrast(&self, texture_strength: f64, force: f64) -> f64 {
        (self.render.imprint_gain * texture_strength * force).min(self.render.imprint_max)
    }

    pub fn contact_visible(&self, texture_strength: f64, force: f64) -> bool {
        self.imprint_contrast(texture_strength, force) >= self.visibility_contrast
    }
}
