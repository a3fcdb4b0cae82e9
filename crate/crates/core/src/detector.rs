//! Incipient slip detection over a frame stream.
//!
//! Every frame is compared against a stored reference frame. The inner
//! contact region gives a rigid motion; the estimated displacement of each
//! contact marker under that motion is subtracted from its measured
//! displacement, and when enough residuals exceed the threshold the frame is
//! flagged as incipient slip and becomes the new reference.
//!
//! Marker identities are carried from frame to frame by matching against the
//! previous frame, so the displacement since the reference may exceed the
//! match radius as long as each inter-frame step stays below it.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::FrameSnapshot;
use crate::geometry::{icr, propagate_velocity, RigidMotion2D, Vec2, DEFAULT_OMEGA_EPSILON};
use crate::raster::{distance_to_background, ContactMask, MarkerObservation, SensorGeometry};
use crate::rigid_fit::{fit_rigid, select_inner, RigidFitResult, DEFAULT_MIN_INNER_MARKERS};
use crate::tracking::{displacement_field, Correspondence, DisplacementField, Matcher, MatcherRegistry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    /// mm
    pub slip_threshold: f64,
    pub min_slipped_markers: usize,
    /// mm
    pub erosion_radius: f64,
    pub min_inner_markers: usize,
    pub min_contact_markers: usize,
    /// Inter-frame match radius, mm. Keep below half the marker pitch.
    pub max_match_radius: f64,
    /// Name of a registered [`Matcher`].
    pub matcher: String,
    pub omega_epsilon: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            slip_threshold: 0.26,
            min_slipped_markers: 3,
            erosion_radius: 3.0,
            min_inner_markers: DEFAULT_MIN_INNER_MARKERS,
            min_contact_markers: 12,
            max_match_radius: 0.7,
            matcher: "mutual-nn-grid".to_owned(),
            omega_epsilon: DEFAULT_OMEGA_EPSILON,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.slip_threshold > 0.0
            && self.min_slipped_markers > 0
            && self.erosion_radius >= 0.0
            && self.min_inner_markers > 0
            && self.min_contact_markers > 0
            && self.max_match_radius > 0.0
            && self.omega_epsilon > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("detector config {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatedDisplacement {
    pub marker_id: u32,
    pub est_disp: Vec2,
}

/// Displacement each in-contact marker would have if the whole patch moved
/// with `motion`.
pub fn estimate_field(motion: &RigidMotion2D, field: &DisplacementField) -> Vec<EstimatedDisplacement> {
    field
        .in_contact()
        .map(|e| EstimatedDisplacement {
            marker_id: e.marker_id,
            est_disp: propagate_velocity(motion, e.ref_pos),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlipEntry {
    pub marker_id: u32,
    pub position: Vec2,
    pub real_disp: Vec2,
    pub est_disp: Vec2,
    pub residual: Vec2,
    pub slipped: bool,
    /// Distance to the contact-mask boundary, mm.
    pub boundary_distance: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SlipField {
    pub entries: Vec<SlipEntry>,
}

impl SlipField {
    pub fn slipped(&self) -> impl Iterator<Item = &SlipEntry> {
        self.entries.iter().filter(|e| e.slipped)
    }

    pub fn slipped_count(&self) -> usize {
        self.slipped().count()
    }

    pub fn max_residual(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.residual.norm())
            .fold(0.0, f64::max)
    }

    pub fn mean_boundary_distance(&self, slipped_only: bool) -> Option<f64> {
        let d: Vec<f64> = self
            .entries
            .iter()
            .filter(|e| !slipped_only || e.slipped)
            .map(|e| e.boundary_distance)
            .collect();
        (!d.is_empty()).then(|| d.iter().sum::<f64>() / d.len() as f64)
    }
}

/// Residual between measured and estimated displacement for every in-contact
/// marker that has an estimate.
pub fn slip_field(
    real: &DisplacementField,
    est: &[EstimatedDisplacement],
    slip_threshold: f64,
    mask: &ContactMask,
    geom: &SensorGeometry,
) -> SlipField {
    let dist = distance_to_background(mask);
    let px = geom.mm_per_px();
    let entries = real
        .in_contact()
        .zip(est)
        .map(|(e, est)| {
            debug_assert_eq!(e.marker_id, est.marker_id);
            let residual = e.disp - est.est_disp;
            SlipEntry {
                marker_id: e.marker_id,
                position: e.cur_pos,
                real_disp: e.disp,
                est_disp: est.est_disp,
                residual,
                slipped: residual.norm() > slip_threshold,
                boundary_distance: geom
                    .pixel_of(e.cur_pos)
                    .map_or(0.0, |(x, y)| dist.at(x, y) * px),
            }
        })
        .collect();
    SlipField { entries }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NoContact,
    Indeterminate,
    NoSlip,
    IncipientSlip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlipDecision {
    pub frame: u64,
    pub verdict: Verdict,
    pub slipped_ids: Vec<u32>,
    pub fit: Option<RigidFitResult>,
    pub icr_point: Option<Vec2>,
    pub rebased: bool,
    pub n_contact: usize,
    pub n_inner: usize,
    pub slip_field: Option<SlipField>,
}

impl SlipDecision {
    pub fn motion(&self) -> Option<RigidMotion2D> {
        self.fit.map(|f| f.motion)
    }

    pub fn record(&self) -> DecisionRecord {
        let motion = self.motion();
        DecisionRecord {
            frame: self.frame,
            verdict: self.verdict,
            slipped_ids: self.slipped_ids.clone(),
            omega: motion.map(|m| m.angular_velocity),
            vx: motion.map(|m| m.linear_velocity.x),
            vy: motion.map(|m| m.linear_velocity.y),
            icr: self.icr_point.map(|p| [p.x, p.y]),
            rebased: self.rebased,
            n_contact: self.n_contact,
            n_inner: self.n_inner,
            rms_residual: self.fit.map(|f| f.rms_residual),
        }
    }
}

/// One line of the JSON-lines decision log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub frame: u64,
    pub verdict: Verdict,
    pub slipped_ids: Vec<u32>,
    pub omega: Option<f64>,
    pub vx: Option<f64>,
    pub vy: Option<f64>,
    pub icr: Option<[f64; 2]>,
    pub rebased: bool,
    pub n_contact: usize,
    pub n_inner: usize,
    pub rms_residual: Option<f64>,
}

#[derive(Debug, Clone)]
struct Reference {
    frame: u64,
    markers: Vec<MarkerObservation>,
}

/// Mutable detector state: the reference frame and the previous frame's
/// tracked markers.
#[derive(Debug, Clone, Default)]
pub struct DetectorState {
    reference: Option<Reference>,
    geometry: Option<SensorGeometry>,
    previous: Vec<MarkerObservation>,
    next_id: u32,
    /// Frames processed since construction; never reset.
    pub frame_count: u64,
    pub rebase_count: u64,
}

impl DetectorState {
    pub fn reference_frame(&self) -> Option<u64> {
        self.reference.as_ref().map(|r| r.frame)
    }

    pub fn reference_markers(&self) -> Option<&[MarkerObservation]> {
        self.reference.as_ref().map(|r| r.markers.as_slice())
    }

    fn fresh_id(&mut self) -> u32 {
        self.next_id += 1;
        self.next_id
    }
}

/// A single detector instance. `step` is serial; run one instance per
/// stream.
#[derive(Debug, Clone)]
pub struct SlipDetector {
    cfg: DetectorConfig,
    matcher: Arc<dyn Matcher>,
    state: DetectorState,
}

impl SlipDetector {
    pub fn new(cfg: DetectorConfig) -> Result<Self> {
        Self::with_registry(cfg, &MatcherRegistry::with_builtins())
    }

    pub fn with_registry(cfg: DetectorConfig, registry: &MatcherRegistry) -> Result<Self> {
        cfg.validate()?;
        let matcher = registry.get(&cfg.matcher)?;
        Ok(Self {
            cfg,
            matcher,
            state: DetectorState::default(),
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.cfg
    }

    pub fn state(&self) -> &DetectorState {
        &self.state
    }

    /// Replaces the reference with `frame`; every marker gets a fresh id.
    pub fn set_reference(&mut self, frame: &FrameSnapshot) {
        let mut markers = frame.markers.clone();
        for m in &mut markers {
            m.id = self.state.fresh_id();
        }
        self.state.previous = markers.clone();
        self.state.geometry = Some(frame.geometry);
        self.state.reference = Some(Reference {
            frame: frame.index,
            markers,
        });
    }

    fn track(&mut self, frame: &FrameSnapshot) -> Vec<MarkerObservation> {
        let prev: Vec<Vec2> = self.state.previous.iter().map(|m| m.position).collect();
        let cur: Vec<Vec2> = frame.markers.iter().map(|m| m.position).collect();
        let corr = self
            .matcher
            .match_points(&prev, &cur, self.cfg.max_match_radius);
        let mut tracked = frame.markers.clone();
        for m in &mut tracked {
            m.id = 0;
        }
        for &(i, j) in &corr.pairs {
            tracked[j].id = self.state.previous[i].id;
        }
        for j in corr.unmatched_cur {
            tracked[j].id = self.state.fresh_id();
        }
        tracked
    }

    pub fn step(&mut self, frame: &FrameSnapshot) -> Result<SlipDecision> {
        let reference_geometry = self.state.geometry.ok_or(Error::NoReference)?;
        if reference_geometry != frame.geometry || !frame.mask.matches(&frame.geometry) {
            return Err(Error::GeometryMismatch {
                reference: format!("{reference_geometry:?}"),
                frame: format!("{:?}", frame.geometry),
            });
        }
        let reference = self.state.reference.as_ref().ok_or(Error::NoReference)?;
        let ref_markers = reference.markers.clone();
        let tracked = self.track(frame);
        self.state.frame_count += 1;

        let corr = Correspondence::by_id(&ref_markers, &tracked);
        let mut field = displacement_field(&corr, &ref_markers, &tracked);
        let n_contact = field.contact_count();

        let mut decision = SlipDecision {
            frame: frame.index,
            verdict: Verdict::NoContact,
            slipped_ids: Vec::new(),
            fit: None,
            icr_point: None,
            rebased: false,
            n_contact,
            n_inner: 0,
            slip_field: None,
        };

        let result = self.evaluate(frame, &mut field, &mut decision);
        self.state.previous = tracked.clone();
        result?;

        if decision.verdict == Verdict::IncipientSlip {
            self.state.reference = Some(Reference {
                frame: frame.index,
                markers: tracked,
            });
            self.state.rebase_count += 1;
            decision.rebased = true;
        }
        Ok(decision)
    }

    fn evaluate(
        &self,
        frame: &FrameSnapshot,
        field: &mut DisplacementField,
        decision: &mut SlipDecision,
    ) -> Result<()> {
        let cfg = &self.cfg;
        if decision.n_contact < cfg.min_contact_markers {
            decision.verdict = Verdict::NoContact;
            return Ok(());
        }
        let inner = match select_inner(
            field,
            &frame.mask,
            &frame.geometry,
            cfg.erosion_radius,
            cfg.min_inner_markers,
        ) {
            Ok(inner) => inner,
            Err(Error::InsufficientInnerRegion { found, .. }) => {
                decision.verdict = Verdict::Indeterminate;
                decision.n_inner = found;
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        decision.n_inner = inner.inner_ids.len();
        let mut ids = inner.inner_ids.clone();
        ids.sort_unstable();
        for e in &mut field.entries {
            e.inner = ids.binary_search(&e.marker_id).is_ok();
        }
        let fit = match fit_rigid(field, &inner, cfg.min_inner_markers) {
            Ok(fit) => fit,
            Err(Error::DegenerateConfiguration { .. } | Error::InsufficientInnerRegion { .. }) => {
                decision.verdict = Verdict::Indeterminate;
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        let est = estimate_field(&fit.motion, field);
        let slip = slip_field(field, &est, cfg.slip_threshold, &frame.mask, &frame.geometry);
        decision.slipped_ids = slip.slipped().map(|e| e.marker_id).collect();
        decision.verdict = if decision.slipped_ids.len() >= cfg.min_slipped_markers {
            Verdict::IncipientSlip
        } else {
            Verdict::NoSlip
        };
        decision.icr_point = icr(&fit.motion, cfg.omega_epsilon);
        decision.fit = Some(fit);
        decision.slip_field = Some(slip);
        Ok(())
    }
}
