use serde::{Deserialize, Serialize};

use super::{connected_components, ContactMask, GrayImage, SensorGeometry};
use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// One detected gel marker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkerObservation {
    /// Assigned by the tracker; 0 while unmatched.
    pub id: u32,
    /// Sensor frame, mm.
    pub position: Vec2,
    pub area_px: u32,
    pub in_contact: bool,
}

impl MarkerObservation {
    pub fn at(position: Vec2) -> Self {
        Self {
            id: 0,
            position,
            area_px: 0,
            in_contact: false,
        }
    }
}

/// Dark-blob marker detection.
///
/// Pixels darker than `dark_thresh` are grouped into 8-connected components;
/// components with an area in `[min_area_px, max_area_px]` become markers.
/// Each is located at the centroid of darkness below the surrounding
/// background, taken over the blob grown by 1.5 px.
pub fn detect_markers(
    img: &GrayImage,
    geom: &SensorGeometry,
    dark_thresh: u8,
    min_area_px: usize,
    max_area_px: usize,
) -> Result<Vec<MarkerObservation>> {
    if min_area_px >= max_area_px || dark_thresh == 0 {
        return Err(Error::InvalidParameter(format!(
            "marker gates: dark<{dark_thresh}, area {min_area_px}..{max_area_px}"
        )));
    }
    if img.width() != geom.width_px || img.height() != geom.height_px {
        return Err(Error::GeometryMismatch {
            reference: format!("{}x{}", geom.width_px, geom.height_px),
            frame: format!("{}x{}", img.width(), img.height()),
        });
    }
    let w = img.width();
    let data = img.data();
    let bits: Vec<bool> = data.iter().map(|&v| v < dark_thresh).collect();
    let dark = ContactMask::from_bits(w, img.height(), bits)?;

    let mut markers = Vec::new();
    for component in connected_components(&dark) {
        if component.len() < min_area_px || component.len() > max_area_px {
            continue;
        }
        let (cx, cy) = refine_centroid(img, &component, dark_thresh);
        markers.push(MarkerObservation {
            id: 0,
            position: geom.px_to_mm(cx, cy),
            area_px: component.len() as u32,
            in_contact: false,
        });
    }
    Ok(markers)
}

/// Centroid of one dark blob, weighted by darkness below the local
/// background.
///
/// The weight is linear in ink coverage, so partially covered rim pixels
/// count in proportion; the background level is the median of a ring just
/// outside the blob.
fn refine_centroid(img: &GrayImage, component: &[usize], dark_thresh: u8) -> (f64, f64) {
    let (w, h) = (img.width(), img.height());
    let data = img.data();
    let n = component.len() as f64;
    let (mut x0, mut y0) = (0.0, 0.0);
    for &i in component {
        x0 += (i % w) as f64 / n;
        y0 += (i / w) as f64 / n;
    }
    let r_in = (n / std::f64::consts::PI).sqrt() + 1.5;
    let r_out = r_in + 1.5;
    let reach = r_out.ceil() as isize;
    let mut ring = Vec::new();
    let mut disk = Vec::new();
    for dy in -reach..=reach {
        for dx in -reach..=reach {
            let (x, y) = (x0.round() as isize + dx, y0.round() as isize + dy);
            if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
                continue;
            }
            let d = (x as f64 - x0).hypot(y as f64 - y0);
            let v = data[y as usize * w + x as usize];
            if d <= r_in {
                disk.push((x as f64, y as f64, v));
            } else if d <= r_out {
                ring.push(v);
            }
        }
    }
    ring.sort_unstable();
    let background = ring
        .get(ring.len() / 2)
        .map_or(f64::from(dark_thresh), |&v| f64::from(v.max(dark_thresh)));
    let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for (x, y, v) in disk {
        let weight = (background - f64::from(v)).max(0.0);
        sw += weight;
        sx += weight * x;
        sy += weight * y;
    }
    if sw > 0.0 {
        (sx / sw, sy / sw)
    } else {
        (x0, y0)
    }
}

/// Flags each marker whose pixel lies inside the contact mask.
pub fn mask_membership(
    markers: &[MarkerObservation],
    mask: &ContactMask,
    geom: &SensorGeometry,
) -> Result<Vec<MarkerObservation>> {
    if !mask.matches(geom) {
        return Err(Error::GeometryMismatch {
            reference: format!("{}x{}", geom.width_px, geom.height_px),
            frame: format!("{}x{}", mask.width(), mask.height()),
        });
    }
    Ok(markers
        .iter()
        .map(|m| MarkerObservation {
            in_contact: mask.contains_mm(geom, m.position),
            ..*m
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blank_image_has_no_markers() {
        let geom = SensorGeometry::default();
        let img = GrayImage::filled(640, 480, 200);
        assert!(detect_markers(&img, &geom, 80, 10, 400).unwrap().is_empty());
    }

    #[test]
    fn square_blob_centroid() {
        let geom = SensorGeometry::default();
        let mut img = GrayImage::filled(640, 480, 200);
        for y in 198..=202 {
            for x in 98..=102 {
                img.set(x, y, 10);
            }
        }
        let found = detect_markers(&img, &geom, 80, 10, 400).unwrap();
        assert_eq!(found.len(), 1);
        let (px, py) = geom.mm_to_px(found[0].position);
        assert!((px - 100.0).abs() < 0.1 && (py - 200.0).abs() < 0.1);
        assert_eq!(found[0].area_px, 25);
    }

    #[test]
    fn area_gates() {
        let geom = SensorGeometry::default();
        let mut img = GrayImage::filled(640, 480, 200);
        img.set(10, 10, 0);
        for y in 100..140 {
            for x in 100..140 {
                img.set(x, y, 0);
            }
        }
        assert!(detect_markers(&img, &geom, 80, 10, 400).unwrap().is_empty());
        assert!(detect_markers(&img, &geom, 80, 400, 10).is_err());
    }

    #[test]
    fn membership_extremes() {
        let geom = SensorGeometry::default();
        let markers: Vec<_> = [(5.0, 5.0), (20.0, 15.0), (39.0, 29.0)]
            .iter()
            .map(|&(x, y)| MarkerObservation::at(Vec2::new(x, y)))
            .collect();
        let none = mask_membership(&markers, &ContactMask::empty(640, 480), &geom).unwrap();
        assert!(none.iter().all(|m| !m.in_contact));
        let all = mask_membership(&markers, &ContactMask::full(640, 480), &geom).unwrap();
        assert!(all.iter().all(|m| m.in_contact));
        assert!(mask_membership(&markers, &ContactMask::full(10, 10), &geom).is_err());
    }
}
