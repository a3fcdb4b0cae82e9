//! Rigid motion of the stick region.
//!
//! The contact mask is eroded to keep only markers well inside the patch,
//! which are assumed not to slip. Their reference → current pairs give the
//! rotation through the closed-form 2D Procrustes angle; the reference point
//! and its velocity are the centroid and mean displacement of the same
//! markers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{apply_motion, RigidMotion2D, Vec2};
use crate::raster::{distance_to_background, ContactMask, SensorGeometry};
use crate::tracking::DisplacementField;

/// Below this second singular value (mm) rotation is unobservable.
pub const MIN_SPREAD_MM: f64 = 1e-6;

pub const DEFAULT_MIN_INNER_MARKERS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerSelection {
    pub inner_ids: Vec<u32>,
    /// mm
    pub erosion_radius: f64,
    /// Mean reference position of the inner markers.
    pub centroid: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidFitResult {
    pub motion: RigidMotion2D,
    /// RMS distance between measured and small-motion predicted positions, mm.
    pub rms_residual: f64,
    pub n_points: usize,
}

/// In-contact markers whose current position survives erosion of the contact
/// mask by `erosion_radius` (mm). The image border counts as background.
pub fn select_inner(
    field: &DisplacementField,
    mask: &ContactMask,
    geom: &SensorGeometry,
    erosion_radius: f64,
    min_inner_markers: usize,
) -> Result<InnerSelection> {
    if !(erosion_radius >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "erosion radius {erosion_radius}"
        )));
    }
    let inner: Vec<_> = if erosion_radius == 0.0 {
        field.in_contact().collect()
    } else {
        let radius_px = erosion_radius / geom.mm_per_px();
        let dist = distance_to_background(mask);
        field
            .in_contact()
            .filter(|e| {
                geom.pixel_of(e.cur_pos)
                    .is_some_and(|(x, y)| dist.at(x, y) > radius_px)
            })
            .collect()
    };
    if inner.len() < min_inner_markers.max(1) {
        return Err(Error::InsufficientInnerRegion {
            found: inner.len(),
            required: min_inner_markers,
        });
    }
    let centroid = Vec2::mean(inner.iter().map(|e| e.ref_pos)).expect("non-empty");
    Ok(InnerSelection {
        inner_ids: inner.iter().map(|e| e.marker_id).collect(),
        erosion_radius,
        centroid,
    })
}

/// Second singular value of the centered point set (mm).
pub fn observability_spread(points: &[Vec2]) -> f64 {
    let Some(c) = Vec2::mean(points.iter().copied()) else {
        return 0.0;
    };
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let d = *p - c;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    let half_trace = 0.5 * (sxx + syy);
    let disc = (0.25 * (sxx - syy).powi(2) + sxy * sxy).sqrt();
    (half_trace - disc).max(0.0).sqrt()
}

/// Least-squares rigid motion taking `reference[i]` to `current[i]`.
pub fn fit_pairs(reference: &[Vec2], current: &[Vec2]) -> Result<RigidFitResult> {
    assert_eq!(reference.len(), current.len(), "unpaired points");
    let spread = observability_spread(reference);
    if reference.len() < 2 || spread < MIN_SPREAD_MM {
        return Err(Error::DegenerateConfiguration { spread });
    }
    let ref_c = Vec2::mean(reference.iter().copied()).expect("non-empty");
    let cur_c = Vec2::mean(current.iter().copied()).expect("non-empty");
    let (mut cross, mut dot) = (0.0, 0.0);
    for (a, b) in reference.iter().zip(current) {
        let (a, b) = (*a - ref_c, *b - cur_c);
        cross += a.cross(b);
        dot += a.dot(b);
    }
    let motion = RigidMotion2D::new(ref_c, cur_c - ref_c, cross.atan2(dot));
    let sse: f64 = reference
        .iter()
        .zip(current)
        .map(|(a, b)| (*b - apply_motion(&motion, *a)).norm_squared())
        .sum();
    Ok(RigidFitResult {
        motion,
        rms_residual: (sse / reference.len() as f64).sqrt(),
        n_points: reference.len(),
    })
}

/// Fits the rigid motion of the inner markers of `field`.
pub fn fit_rigid(
    field: &DisplacementField,
    inner: &InnerSelection,
    min_inner_markers: usize,
) -> Result<RigidFitResult> {
    let mut ids = inner.inner_ids.clone();
    ids.sort_unstable();
    let (reference, current): (Vec<Vec2>, Vec<Vec2>) = field
        .entries
        .iter()
        .filter(|e| ids.binary_search(&e.marker_id).is_ok())
        .map(|e| (e.ref_pos, e.cur_pos))
        .unzip();
    if reference.len() < min_inner_markers {
        return Err(Error::InsufficientInnerRegion {
            found: reference.len(),
            required: min_inner_markers,
        });
    }
    fit_pairs(&reference, &current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracking::DisplacementEntry;

    fn field_from(refs: &[Vec2], curs: &[Vec2]) -> DisplacementField {
        DisplacementField {
            entries: refs
                .iter()
                .zip(curs)
                .enumerate()
                .map(|(i, (&r, &c))| DisplacementEntry {
                    marker_id: i as u32 + 1,
                    ref_pos: r,
                    cur_pos: c,
                    disp: c - r,
                    in_contact: true,
                    inner: false,
                })
                .collect(),
        }
    }

    fn grid(n: usize, pitch: f64, origin: Vec2) -> Vec<Vec2> {
        let mut v = Vec::new();
        for i in 0..n {
            for j in 0..n {
                v.push(origin + Vec2::new(j as f64 * pitch, i as f64 * pitch));
            }
        }
        v
    }

    #[test]
    fn spread_examples() {
        let line = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(2.0, 2.0)];
        assert!(observability_spread(&line) < 1e-12);
        let square = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 1.0),
        ];
        assert!((observability_spread(&square) - 1.0).abs() < 1e-12);
        assert_eq!(observability_spread(&[Vec2::new(3.0, 4.0); 5]), 0.0);
    }

    #[test]
    fn pure_translation() {
        let refs = grid(4, 1.5, Vec2::new(10.0, 10.0));
        let curs: Vec<_> = refs.iter().map(|&p| p + Vec2::new(0.4, 0.0)).collect();
        let fit = fit_pairs(&refs, &curs).unwrap();
        assert!((fit.motion.linear_velocity - Vec2::new(0.4, 0.0)).norm() < 1e-12);
        assert!(fit.motion.angular_velocity.abs() < 1e-12);
        assert!(fit.rms_residual < 1e-12);
    }

    #[test]
    fn exact_rotation_about_centroid() {
        let refs = grid(5, 1.5, Vec2::new(10.0, 10.0));
        let c = Vec2::mean(refs.iter().copied()).unwrap();
        let curs: Vec<_> = refs.iter().map(|&p| c + (p - c).rotated(0.02)).collect();
        let fit = fit_pairs(&refs, &curs).unwrap();
        assert!((fit.motion.angular_velocity - 0.02).abs() < 1e-9);
        assert!(fit.motion.linear_velocity.norm() < 1e-9);
    }

    #[test]
    fn collinear_is_degenerate() {
        let refs: Vec<_> = (0..8).map(|i| Vec2::new(i as f64, 2.0 * i as f64)).collect();
        assert!(matches!(
            fit_pairs(&refs, &refs),
            Err(Error::DegenerateConfiguration { .. })
        ));
    }

    #[test]
    fn zero_erosion_keeps_all_contact_markers() {
        let geom = SensorGeometry::default();
        let refs = grid(4, 1.5, Vec2::new(10.0, 10.0));
        let mut field = field_from(&refs, &refs);
        field.entries[0].in_contact = false;
        let mask = ContactMask::empty(640, 480);
        let sel = select_inner(&field, &mask, &geom, 0.0, 6).unwrap();
        assert_eq!(sel.inner_ids.len(), 15);
    }

    #[test]
    fn thin_mask_empties_after_erosion() {
        let geom = SensorGeometry::default();
        let refs = grid(4, 1.5, Vec2::new(10.0, 10.0));
        let field = field_from(&refs, &refs);
        // a 2 mm wide band cannot survive a 3 mm erosion
        let mut mask = ContactMask::empty(640, 480);
        for y in 0..480 {
            for x in 150..182 {
                mask.set(x, y, true);
            }
        }
        assert!(matches!(
            select_inner(&field, &mask, &geom, 3.0, 6),
            Err(Error::InsufficientInnerRegion { .. })
        ));
    }

    #[test]
    fn fit_rigid_requires_enough_points() {
        let refs = grid(2, 1.5, Vec2::new(10.0, 10.0));
        let field = field_from(&refs, &refs);
        let sel = InnerSelection {
            inner_ids: vec![1, 2, 3, 4],
            erosion_radius: 0.0,
            centroid: Vec2::ZERO,
        };
        assert!(matches!(
            fit_rigid(&field, &sel, 6),
            Err(Error::InsufficientInnerRegion { found: 4, required: 6 })
        ));
        assert!(fit_rigid(&field, &sel, 3).is_ok());
    }
}
