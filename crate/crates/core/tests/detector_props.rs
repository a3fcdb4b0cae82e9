mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use tactile_slip::{
    propagate_velocity, DetectorConfig, FrameSnapshot, MarkerMask, RigidMotion2D, SensorGeometry, SlipDetector,
    Vec2, Verdict,
};

use common::{observations, rest_grid};

fn frame(index: u64, positions: &[Vec2], contact: &[bool]) -> FrameSnapshot {
    let obs = observations(positions, |i| contact[i]);
    FrameSnapshot::from_markers(index, SensorGeometry::default(), obs, &MarkerMask::default())
}

fn disk_contact(rest: &[Vec2], centre: Vec2, radius: f64) -> Vec<bool> {
    rest.iter().map(|p| p.distance(centre) <= radius).collect()
}

fn detector(cfg: DetectorConfig) -> SlipDetector {
    SlipDetector::new(cfg).unwrap()
}

/// Positions after moving every marker by a fraction of the linear rigid velocity field.
fn linear_field(rest: &[Vec2], m: &RigidMotion2D, t: f64) -> Vec<Vec2> {
    rest.iter().map(|&p| p + propagate_velocity(m, p) * t).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rigid_fields_never_slip(
        c in (14.0f64..26.0, 11.0f64..19.0),
        radius in 6.0f64..10.0,
        v in (-0.5f64..0.5, -0.5f64..0.5),
        w in -0.05f64..0.05,
        p in (0.0f64..40.0, 0.0f64..30.0),
    ) {
        let rest = rest_grid();
        let contact = disk_contact(&rest, Vec2::new(c.0, c.1), radius);
        let m = RigidMotion2D::new(Vec2::new(p.0, p.1), Vec2::new(v.0, v.1), w);
        let max_disp = rest.iter().map(|&q| propagate_velocity(&m, q).norm()).fold(0.0, f64::max);
        // The stream is sampled finely enough that each step stays trackable.
        let steps = (max_disp / 0.3).ceil().max(1.0) as usize;
        let mut det = detector(DetectorConfig::default());
        det.set_reference(&frame(0, &rest, &contact));
        for k in 1..=steps {
            let cur = linear_field(&rest, &m, k as f64 / steps as f64);
            let d = det.step(&frame(k as u64, &cur, &contact)).unwrap();
            prop_assert_eq!(d.verdict, Verdict::NoSlip);
            let w_k = w * k as f64 / steps as f64;
            let r_max = radius + 1.5;
            let gap = w_k.abs() - w_k.abs().atan();
            prop_assert!(d.slip_field.unwrap().max_residual() <= gap * 2.0 * r_max + 1e-9);
        }
    }

    #[test]
    fn thresholds_are_monotone(
        seed in any::<u64>(),
        t1 in 0.05f64..0.4,
        dt in 0.0f64..0.3,
        k1 in 1usize..6,
        dk in 0usize..5,
    ) {
        let rest = rest_grid();
        let contact = disk_contact(&rest, Vec2::new(20.75, 15.75), 8.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let jitter = Normal::new(0.0, 0.12).unwrap();
        let cur: Vec<Vec2> = rest
            .iter()
            .zip(&contact)
            .map(|(&p, &c)| if c { p + Vec2::new(jitter.sample(&mut rng), jitter.sample(&mut rng)) } else { p })
            .collect();
        let reference = frame(0, &rest, &contact);
        let current = frame(1, &cur, &contact);
        let run = |threshold: f64, k: usize| {
            let mut det = detector(DetectorConfig {
                slip_threshold: threshold,
                min_slipped_markers: k,
                ..DetectorConfig::default()
            });
            det.set_reference(&reference);
            det.step(&current).unwrap()
        };
        let lo = run(t1, k1);
        let hi = run(t1 + dt, k1);
        prop_assert!(hi.slipped_ids.len() <= lo.slipped_ids.len());
        let strict = run(t1, k1 + dk);
        if lo.verdict == Verdict::NoSlip {
            prop_assert_eq!(strict.verdict, Verdict::NoSlip);
        }
    }

    #[test]
    fn stepping_a_rebased_frame_again_is_quiet(
        angle in 0.0f64..std::f64::consts::TAU,
        shift in 0.28f64..0.34,
        radius in 7.0f64..10.0,
    ) {
        let rest = rest_grid();
        let centre = Vec2::new(20.75, 15.75);
        let contact = disk_contact(&rest, centre, radius);
        // Inner markers follow the object; the outer ring stays behind.
        let s = Vec2::new(angle.cos(), angle.sin()) * shift;
        let cur: Vec<Vec2> = rest
            .iter()
            .map(|&p| if p.distance(centre) < radius - 1.6 { p + s } else { p })
            .collect();
        let mut det = detector(DetectorConfig::default());
        det.set_reference(&frame(0, &rest, &contact));
        let f = frame(1, &cur, &contact);
        let first = det.step(&f).unwrap();
        prop_assert_eq!(first.verdict, Verdict::IncipientSlip);
        prop_assert!(first.rebased);
        prop_assert_eq!(det.state().reference_frame(), Some(1));
        let second = det.step(&f).unwrap();
        prop_assert_eq!(second.verdict, Verdict::NoSlip);
        prop_assert!(!second.rebased);
    }

    #[test]
    fn decisions_are_deterministic(seed in any::<u64>()) {
        let rest = rest_grid();
        let contact = disk_contact(&rest, Vec2::new(20.75, 15.75), 8.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let jitter = Normal::new(0.0, 0.1).unwrap();
        let frames: Vec<FrameSnapshot> = (1..6)
            .map(|k| {
                let cur: Vec<Vec2> = rest
                    .iter()
                    .map(|&p| p + Vec2::new(jitter.sample(&mut rng), jitter.sample(&mut rng)))
                    .collect();
                frame(k, &cur, &contact)
            })
            .collect();
        let mut a = detector(DetectorConfig::default());
        a.set_reference(&frame(0, &rest, &contact));
        let mut b = a.clone();
        for f in &frames {
            prop_assert_eq!(a.step(f).unwrap(), b.step(f).unwrap());
        }
    }
}

#[test]
fn static_scene_never_slips() {
    let rest = rest_grid();
    let contact = disk_contact(&rest, Vec2::new(20.75, 15.75), 8.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut det = detector(DetectorConfig::default());
    det.set_reference(&frame(0, &rest, &contact));
    for k in 1..=100 {
        let cur: Vec<Vec2> = rest
            .iter()
            .map(|&p| p + Vec2::new(noise.sample(&mut rng), noise.sample(&mut rng)))
            .collect();
        assert_eq!(det.step(&frame(k, &cur, &contact)).unwrap().verdict, Verdict::NoSlip);
    }
    assert_eq!(det.state().rebase_count, 0);
}

#[test]
fn small_patch_is_indeterminate_and_keeps_reference() {
    let rest = rest_grid();
    // 13 markers: enough contact, but nothing survives a 3 mm erosion.
    let contact = disk_contact(&rest, Vec2::new(20.0, 15.0), 3.1);
    let n: usize = contact.iter().filter(|&&c| c).count();
    assert!(n >= 12, "{n}");
    let mut det = detector(DetectorConfig::default());
    det.set_reference(&frame(0, &rest, &contact));
    let d = det.step(&frame(1, &rest, &contact)).unwrap();
    assert_eq!(d.verdict, Verdict::Indeterminate);
    assert_eq!(det.state().reference_frame(), Some(0));
}

#[test]
fn decision_record_serializes_as_one_json_line() {
    let rest = rest_grid();
    let contact = disk_contact(&rest, Vec2::new(20.75, 15.75), 8.0);
    let mut det = detector(DetectorConfig::default());
    det.set_reference(&frame(0, &rest, &contact));
    let rec = det.step(&frame(1, &rest, &contact)).unwrap().record();
    let line = serde_json::to_string(&rec).unwrap();
    assert!(!line.contains('\n'));
    let v: serde_json::Value = serde_json::from_str(&line).unwrap();
    for key in [
        "frame", "verdict", "slipped_ids", "omega", "vx", "vy", "icr", "rebased", "n_contact",
        "n_inner", "rms_residual",
    ] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["verdict"], "no_slip");
}
