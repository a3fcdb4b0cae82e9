use std::collections::BTreeSet;

use gelsim::{benchmark_objects, benchmark_suite, render, simulate, GelModel, PatchShape, TrialLabel};
use tactile_slip::{DetectorConfig, FrameSnapshot, RasterConfig};

#[test]
fn suite_has_240_trials() {
    let suite = benchmark_suite(1);
    assert_eq!(suite.len(), 240);
    let objects: BTreeSet<_> = suite.iter().map(|t| t.object.name.clone()).collect();
    assert_eq!(objects.len(), 10);
    for name in &objects {
        let trials: Vec<_> = suite.iter().filter(|t| &t.object.name == name).collect();
        assert_eq!(trials.len(), 24);
        assert_eq!(trials.iter().filter(|t| t.label == TrialLabel::Slip).count(), 18);
        assert_eq!(trials.iter().filter(|t| t.label == TrialLabel::NoSlip).count(), 6);
    }
}

#[test]
fn objects_span_the_declared_ranges() {
    let objs = benchmark_objects();
    let mu: Vec<f64> = objs.iter().map(|o| o.friction).collect();
    let ts: Vec<f64> = objs.iter().map(|o| o.texture_strength).collect();
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert_eq!((min(&mu), max(&mu)), (0.2, 1.2));
    assert_eq!((min(&ts), max(&ts)), (0.05, 1.0));
    let kinds: BTreeSet<_> = objs
        .iter()
        .map(|o| match o.shape {
            PatchShape::Disk { .. } => 0,
            PatchShape::Rectangle { .. } => 1,
            PatchShape::Annulus { .. } => 2,
        })
        .collect();
    assert_eq!(kinds.len(), 3);
}

#[test]
fn suite_is_seed_deterministic() {
    assert_eq!(benchmark_suite(5), benchmark_suite(5));
    assert_ne!(benchmark_suite(5), benchmark_suite(6));
}

#[test]
fn every_script_is_valid_and_labels_hold() {
    let model = GelModel::default();
    for t in benchmark_suite(1) {
        let frames = simulate(&model, &t.object, &t.script, t.sim_seed).unwrap();
        let any_slip = frames.iter().any(|f| f.slipping_count() > 0);
        assert_eq!(any_slip, t.label == TrialLabel::Slip, "{}", t.name());
    }
}

#[test]
fn low_texture_object_at_low_force_shows_too_few_contact_markers() {
    let model = GelModel::default();
    let cfg = RasterConfig::default();
    let min_contact = DetectorConfig::default().min_contact_markers;
    let suite = benchmark_suite(1);
    for name in ["foam_sponge", "card_box"] {
        let t = suite
            .iter()
            .find(|t| t.object.name == name && t.force == 5.0)
            .unwrap();
        let frames = simulate(&model, &t.object, &t.script, t.sim_seed).unwrap();
        for f in frames.iter().step_by(6) {
            let img = render(f, &model, &t.object, t.texture_seed);
            let snap = FrameSnapshot::from_image(f.index, img, model.geometry, &cfg).unwrap();
            assert!(snap.contact_markers() < min_contact, "{name} frame {}", f.index);
        }
        let strong = suite
            .iter()
            .find(|t| t.object.name == name && t.force == 30.0)
            .unwrap();
        let frames = simulate(&model, &strong.object, &strong.script, strong.sim_seed).unwrap();
        let img = render(&frames[0], &model, &strong.object, strong.texture_seed);
        let snap = FrameSnapshot::from_image(0, img, model.geometry, &cfg).unwrap();
        assert!(snap.contact_markers() >= min_contact, "{name} at 30 N");
    }
}
