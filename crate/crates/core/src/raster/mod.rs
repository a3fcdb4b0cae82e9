//! Grayscale tactile images: contact-region extraction and marker
//! localization.
//!
//! Pixel `(i, j)` covers `[i, i+1) × [j, j+1)` in image coordinates with rows
//! growing downwards; the sensor frame is in millimetres with y up. All
//! conversions go through [`SensorGeometry`].

mod edges;
mod markers;
mod morphology;
mod pgm;

pub use edges::edge_map;
pub use markers::{detect_markers, mask_membership, MarkerObservation};
pub use morphology::{
    closing, connected_components, contact_mask, dilate, distance_to_background, erode,
    fill_holes, octagon_steps, DistanceMap,
};
pub use pgm::{read_pgm, write_pgm};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!("{width}x{height} image")));
        }
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{} bytes for a {width}x{height} image",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "empty image");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }

    /// Shifts the content by an integer offset, filling uncovered pixels.
    pub fn shifted(&self, dx: isize, dy: isize, fill: u8) -> GrayImage {
        let mut out = GrayImage::filled(self.width, self.height, fill);
        for y in 0..self.height {
            let sy = y as isize - dy;
            if sy < 0 || sy >= self.height as isize {
                continue;
            }
            for x in 0..self.width {
                let sx = x as isize - dx;
                if sx < 0 || sx >= self.width as isize {
                    continue;
                }
                out.set(x, y, self.get(sx as usize, sy as usize));
            }
        }
        out
    }
}

/// Mapping between image pixels and the physical sensing surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorGeometry {
    pub width_px: usize,
    pub height_px: usize,
    pub width_mm: f64,
    pub height_mm: f64,
}

impl Default for SensorGeometry {
    /// 640 × 480 camera over a 40 mm × 30 mm gel.
    fn default() -> Self {
        Self {
            width_px: 640,
            height_px: 480,
            width_mm: 40.0,
            height_mm: 30.0,
        }
    }
}

impl SensorGeometry {
    pub fn validate(&self) -> Result<()> {
        let positive = self.width_px > 0
            && self.height_px > 0
            && self.width_mm > 0.0
            && self.height_mm > 0.0
            && self.width_mm.is_finite()
            && self.height_mm.is_finite();
        if !positive {
            return Err(Error::InvalidGeometry(format!("{self:?}")));
        }
        let (sx, sy) = (self.mm_per_px_x(), self.mm_per_px_y());
        if (sx / sy - 1.0).abs() > 0.2 {
            return Err(Error::InvalidGeometry(format!(
                "pixel aspect {sx:.4} x {sy:.4} mm is not near-square"
            )));
        }
        Ok(())
    }

    pub fn mm_per_px_x(&self) -> f64 {
        self.width_mm / self.width_px as f64
    }

    pub fn mm_per_px_y(&self) -> f64 {
        self.height_mm / self.height_px as f64
    }

    /// Mean pixel pitch, used to convert radii between units.
    pub fn mm_per_px(&self) -> f64 {
        0.5 * (self.mm_per_px_x() + self.mm_per_px_y())
    }

    /// Pixel coordinates (pixel index = pixel center) to sensor millimetres.
    pub fn px_to_mm(&self, px: f64, py: f64) -> Vec2 {
        Vec2::new(
            (px + 0.5) * self.mm_per_px_x(),
            self.height_mm - (py + 0.5) * self.mm_per_px_y(),
        )
    }

    pub fn mm_to_px(&self, p: Vec2) -> (f64, f64) {
        (
            p.x / self.mm_per_px_x() - 0.5,
            (self.height_mm - p.y) / self.mm_per_px_y() - 0.5,
        )
    }

    /// The pixel containing `p`, if inside the image.
    pub fn pixel_of(&self, p: Vec2) -> Option<(usize, usize)> {
        let (px, py) = self.mm_to_px(p);
        let (ix, iy) = (px.round(), py.round());
        if ix < 0.0 || iy < 0.0 || ix >= self.width_px as f64 || iy >= self.height_px as f64 {
            return None;
        }
        Some((ix as usize, iy as usize))
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= 0.0 && p.y >= 0.0 && p.x <= self.width_mm && p.y <= self.height_mm
    }
}

/// Binary image, used both for edge maps and contact regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContactMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl ContactMask {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn full(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![true; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{} bits for a {width}x{height} mask",
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// Pixels whose center lies within `radius_px` of `(cx, cy)`.
    pub fn disk(width: usize, height: usize, cx: f64, cy: f64, radius_px: f64) -> Self {
        let mut mask = Self::empty(width, height);
        mask.paint_disk(cx, cy, radius_px);
        mask
    }

    pub fn paint_disk(&mut self, cx: f64, cy: f64, radius_px: f64) {
        let r2 = radius_px * radius_px;
        let x0 = (cx - radius_px).floor().max(0.0) as usize;
        let y0 = (cy - radius_px).floor().max(0.0) as usize;
        let x1 = ((cx + radius_px).ceil() as isize).min(self.width as isize - 1);
        let y1 = ((cy + radius_px).ceil() as isize).min(self.height as isize - 1);
        if x1 < 0 || y1 < 0 {
            return;
        }
        for y in y0..=y1 as usize {
            for x in x0..=x1 as usize {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                if dx * dx + dy * dy <= r2 {
                    self.bits[y * self.width + x] = true;
                }
            }
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn area_px(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn matches(&self, geom: &SensorGeometry) -> bool {
        self.width == geom.width_px && self.height == geom.height_px
    }

    /// Whether the sensor point `p` falls on a set pixel.
    pub fn contains_mm(&self, geom: &SensorGeometry, p: Vec2) -> bool {
        geom.pixel_of(p).is_some_and(|(x, y)| self.get(x, y))
    }

    /// Inclusive bounding box `(x0, y0, x1, y1)` of the set pixels.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        let mut bbox: Option<(usize, usize, usize, usize)> = None;
        for y in 0..self.height {
            let row = &self.bits[y * self.width..(y + 1) * self.width];
            let Some(first) = row.iter().position(|&b| b) else {
                continue;
            };
            let last = row.iter().rposition(|&b| b).unwrap_or(first);
            bbox = Some(match bbox {
                None => (first, y, last, y),
                Some((x0, y0, x1, _)) => (x0.min(first), y0, x1.max(last), y),
            });
        }
        bbox
    }

    pub(crate) fn bits_mut(&mut self) -> &mut [bool] {
        &mut self.bits
    }
}
