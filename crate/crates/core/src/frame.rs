//! Frame snapshots: the unit of detector input.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::raster::{
    contact_mask, detect_markers, dilate, edge_map, erode, fill_holes, mask_membership, ContactMask,
    GrayImage, MarkerObservation, SensorGeometry,
};

/// Parameters of the image → (markers, contact mask) pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RasterConfig {
    pub canny_low: f64,
    pub canny_high: f64,
    pub close_radius_px: f64,
    pub min_component_px: usize,
    pub dark_thresh: u8,
    pub min_marker_area_px: usize,
    pub max_marker_area_px: usize,
    /// Edge pixels this close to a dark marker pixel are ignored when
    /// building the contact mask.
    pub marker_suppress_px: f64,
}

impl Default for RasterConfig {
    fn default() -> Self {
        Self {
            canny_low: 40.0,
            canny_high: 100.0,
            close_radius_px: 7.0,
            min_component_px: 400,
            dark_thresh: 80,
            min_marker_area_px: 10,
            max_marker_area_px: 400,
            marker_suppress_px: 3.0,
        }
    }
}

/// Contact-mask construction for marker-only frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MarkerMask {
    /// mm beyond the outermost in-contact markers.
    pub margin_mm: f64,
    /// Closing radius, mm. Must exceed half the diagonal marker spacing.
    pub bridge_mm: f64,
}

impl Default for MarkerMask {
    fn default() -> Self {
        Self {
            margin_mm: 0.3,
            bridge_mm: 1.2,
        }
    }
}

/// One tactile frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSnapshot {
    pub index: u64,
    pub geometry: SensorGeometry,
    pub markers: Vec<MarkerObservation>,
    pub mask: ContactMask,
    pub image: Option<GrayImage>,
}

impl FrameSnapshot {
    /// Runs contact extraction and marker localization on a raster frame.
    pub fn from_image(
        index: u64,
        image: GrayImage,
        geometry: SensorGeometry,
        cfg: &RasterConfig,
    ) -> Result<Self> {
        let mask = extract_contact(&image, cfg)?;
        let markers = detect_markers(
            &image,
            &geometry,
            cfg.dark_thresh,
            cfg.min_marker_area_px,
            cfg.max_marker_area_px,
        )?;
        let markers = mask_membership(&markers, &mask, &geometry)?;
        Ok(Self {
            index,
            geometry,
            markers,
            mask,
            image: Some(image),
        })
    }

    /// Builds a snapshot from already-localized markers with contact flags.
    ///
    /// The contact mask is a closing of the in-contact markers: disks of
    /// `margin_mm + bridge_mm` are painted, holes filled, and the result
    /// eroded by `bridge_mm`, leaving an edge about `margin_mm` outside the
    /// outermost markers.
    pub fn from_markers(
        index: u64,
        geometry: SensorGeometry,
        markers: Vec<MarkerObservation>,
        shape: &MarkerMask,
    ) -> Self {
        let mask = marker_mask(&geometry, &markers, shape);
        Self {
            index,
            geometry,
            markers,
            mask,
            image: None,
        }
    }

    pub fn contact_markers(&self) -> usize {
        self.markers.iter().filter(|m| m.in_contact).count()
    }
}

/// Contact region of a raster frame: texture edges with marker outlines
/// removed, grouped by closing and hole filling.
pub fn extract_contact(image: &GrayImage, cfg: &RasterConfig) -> Result<ContactMask> {
    let edges = edge_map(image, cfg.canny_low, cfg.canny_high)?;
    let dark_bits = image.data().iter().map(|&v| v < cfg.dark_thresh).collect();
    let dark = ContactMask::from_bits(image.width(), image.height(), dark_bits)?;
    let near_marker = dilate(&dark, cfg.marker_suppress_px);
    let texture_bits = edges
        .bits()
        .iter()
        .zip(near_marker.bits())
        .map(|(&e, &m)| e && !m)
        .collect();
    let texture = ContactMask::from_bits(image.width(), image.height(), texture_bits)?;
    contact_mask(&texture, cfg.close_radius_px, cfg.min_component_px)
}

fn marker_mask(
    geometry: &SensorGeometry,
    markers: &[MarkerObservation],
    shape: &MarkerMask,
) -> ContactMask {
    let (w, h) = (geometry.width_px, geometry.height_px);
    let mut full = ContactMask::empty(w, h);
    let centres: Vec<(f64, f64)> = markers
        .iter()
        .filter(|m| m.in_contact)
        .map(|m| geometry.mm_to_px(m.position))
        .collect();
    if centres.is_empty() {
        return full;
    }
    let scale = geometry.mm_per_px();
    let paint_px = (shape.margin_mm + shape.bridge_mm) / scale;
    let bridge_px = shape.bridge_mm / scale;
    // Work on the padded bounding box of the painted disks only.
    let pad = paint_px + 2.0;
    let lo = |v: f64| (v - pad).floor().max(0.0) as usize;
    let x0 = lo(centres.iter().map(|c| c.0).fold(f64::INFINITY, f64::min));
    let y0 = lo(centres.iter().map(|c| c.1).fold(f64::INFINITY, f64::min));
    let x1 = ((centres.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max) + pad).ceil() as isize)
        .clamp(0, w as isize - 1) as usize;
    let y1 = ((centres.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max) + pad).ceil() as isize)
        .clamp(0, h as isize - 1) as usize;
    if x0 > x1 || y0 > y1 {
        return full;
    }
    let (cw, ch) = (x1 - x0 + 1, y1 - y0 + 1);
    let mut crop = ContactMask::empty(cw, ch);
    for &(cx, cy) in &centres {
        crop.paint_disk(cx - x0 as f64, cy - y0 as f64, paint_px);
    }
    let crop = erode(&fill_holes(&crop), bridge_px, false);
    for y in 0..ch {
        for x in 0..cw {
            if crop.get(x, y) {
                full.set(x0 + x, y0 + y, true);
            }
        }
    }
    full
}
