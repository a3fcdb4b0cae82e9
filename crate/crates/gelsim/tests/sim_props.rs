use gelsim::{
    simulate, GelModel, LoadFrame, LoadScript, MarkerState, ObjectSpec, PatchShape, PressureProfile,
};
use proptest::prelude::*;
use tactile_slip::Vec2;

fn object() -> impl Strategy<Value = ObjectSpec> {
    let shape = prop_oneof![
        (5.0f64..10.0).prop_map(|radius| PatchShape::Disk { radius }),
        (8.0f64..20.0, 8.0f64..16.0).prop_map(|(width, height)| PatchShape::Rectangle { width, height }),
        (0.5f64..3.0, 6.0f64..10.0).prop_map(|(inner_radius, outer_radius)| PatchShape::Annulus {
            inner_radius,
            outer_radius
        }),
    ];
    let profile = prop_oneof![Just(PressureProfile::Dome), Just(PressureProfile::Uniform)];
    (shape, profile, 0.2f64..1.2, 0.5f64..3.0).prop_map(|(shape, profile, friction, peak_load)| ObjectSpec {
        name: "p".into(),
        shape,
        profile,
        friction,
        peak_load,
        texture_strength: 1.0,
        centre: Vec2::new(20.75, 15.75),
    })
}

/// Random walk of small pose increments.
fn script() -> impl Strategy<Value = LoadScript> {
    prop::collection::vec((-0.1f64..0.1, -0.1f64..0.1, -0.01f64..0.01, 5.0f64..30.0), 1..25).prop_map(|steps| {
        let mut pose = LoadFrame::rest(10.0);
        let mut frames = Vec::new();
        for (dx, dy, dr, f) in steps {
            pose.translation = pose.translation + Vec2::new(dx, dy);
            pose.rotation += dr;
            pose.force = f;
            frames.push(pose);
        }
        LoadScript::new(frames)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coulomb_cap_holds(obj in object(), s in script(), seed in any::<u64>()) {
        let model = GelModel::default();
        let frames = simulate(&model, &obj, &s, seed).unwrap();
        let rest = model.rest_positions();
        for f in &frames {
            let scale = model.load_scale(f.pose.force);
            for (i, u) in f.displacements.iter().enumerate() {
                match f.states[i] {
                    MarkerState::OutOfContact => prop_assert_eq!(*u, Vec2::ZERO),
                    _ => {
                        let load = obj.base_load(rest[i]).unwrap();
                        prop_assert!(model.shear_stiffness * u.norm() <= obj.friction * load * scale + 1e-9);
                    }
                }
            }
            prop_assert!(f.positions.iter().all(|p| p.is_finite()));
        }
    }

    #[test]
    fn never_slipped_stuck_markers_follow_the_object(obj in object(), s in script(), seed in any::<u64>()) {
        let model = GelModel { noise_sigma: 0.0, ..GelModel::default() };
        let frames = simulate(&model, &obj, &s, seed).unwrap();
        let rest = model.rest_positions();
        // Object displacement at each marker when it last left contact; a
        // marker reattaches there.
        let mut offset = vec![Vec2::ZERO; rest.len()];
        let mut slipped = vec![false; rest.len()];
        for f in &frames {
            for i in 0..rest.len() {
                let target = f.pose.target(obj.centre, rest[i]);
                match f.states[i] {
                    MarkerState::OutOfContact => {
                        offset[i] = target;
                        slipped[i] = false;
                    }
                    MarkerState::Slipping => slipped[i] = true,
                    MarkerState::Stuck if !slipped[i] => {
                        prop_assert!((f.displacements[i] - (target - offset[i])).norm() < 1e-12);
                    }
                    MarkerState::Stuck => {}
                }
            }
        }
    }

    #[test]
    fn labels_follow_state_counts(obj in object(), s in script(), seed in any::<u64>()) {
        let model = GelModel::default();
        for f in simulate(&model, &obj, &s, seed).unwrap() {
            let (c, sl) = (f.contact_count(), f.slipping_count());
            prop_assert_eq!(f.label == gelsim::FrameLabel::IncipientSlip, sl > 0 && sl < c);
        }
    }

    #[test]
    fn simulation_is_deterministic(obj in object(), s in script(), seed in any::<u64>()) {
        let model = GelModel::default();
        let a = simulate(&model, &obj, &s, seed).unwrap();
        let b = simulate(&model, &obj, &s, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn dome_onset_is_outside_in(r in 6.0f64..10.0, friction in 0.2f64..1.2, step in 0.005f64..0.05) {
        let model = GelModel { noise_sigma: 0.0, ..GelModel::default() };
        let obj = ObjectSpec {
            name: "d".into(),
            shape: PatchShape::Disk { radius: r },
            profile: PressureProfile::Dome,
            friction,
            peak_load: 1.0,
            texture_strength: 1.0,
            centre: Vec2::new(20.75, 15.75),
        };
        let script = LoadScript::new((0..60).map(|k| LoadFrame {
            translation: Vec2::new(step * k as f64, 0.0),
            rotation: 0.0,
            force: 10.0,
        }).collect());
        let frames = simulate(&model, &obj, &script, 0).unwrap();
        let rest = model.rest_positions();
        let mut onsets: Vec<(f64, usize)> = (0..rest.len())
            .filter(|&i| frames[0].states[i] != MarkerState::OutOfContact)
            .map(|i| {
                let k = frames.iter().position(|f| f.states[i] == MarkerState::Slipping).unwrap_or(usize::MAX);
                ((rest[i] - obj.centre).norm(), k)
            })
            .collect();
        onsets.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in onsets.windows(2) {
            prop_assert!(w[1].1 <= w[0].1);
        }
    }
}
