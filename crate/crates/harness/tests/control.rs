use proptest::prelude::*;
use slip_harness::config::ControlConfig;
use slip_harness::control::{run_control_loop, GripControllerState, Phase, Scenario, Termination};
use slip_harness::gates::{all_passed, control_gates};
use slip_harness::HarnessConfig;
use tactile_slip::Verdict;

const LEVELS: [f64; 6] = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0];

proptest! {
    #[test]
    fn controller_force_stays_on_the_ladder(
        verdicts in prop::collection::vec(0usize..4, 0..200),
        pause in 0usize..5,
    ) {
        let all = [Verdict::NoContact, Verdict::Indeterminate, Verdict::NoSlip, Verdict::IncipientSlip];
        let cfg = ControlConfig::default();
        let mut state = GripControllerState::new(&cfg, Phase::Screwing);
        let mut last = state.force;
        for (k, &v) in verdicts.iter().enumerate() {
            let raised = state.on_verdict(k as u64, all[v], 1, pause);
            prop_assert!(LEVELS.contains(&state.force));
            prop_assert!(state.force >= last);
            prop_assert_eq!(raised, state.force > last);
            if raised {
                prop_assert_eq!(state.force - last, 10.0);
            }
            last = state.force;
        }
        prop_assert_eq!(state.force, 10.0 + 10.0 * state.slip_event_log.len() as f64);
    }
}

#[test]
fn pause_swallows_slip_verdicts() {
    let cfg = ControlConfig::default();
    let mut s = GripControllerState::new(&cfg, Phase::Unscrewing);
    assert!(s.on_verdict(1, Verdict::IncipientSlip, 5, 2));
    assert!(!s.on_verdict(2, Verdict::IncipientSlip, 5, 2));
    assert!(!s.on_verdict(3, Verdict::IncipientSlip, 5, 2));
    assert!(s.on_verdict(4, Verdict::IncipientSlip, 5, 2));
    assert_eq!(s.force, 30.0);
}

#[test]
fn force_clamps_at_the_maximum() {
    let cfg = ControlConfig::default();
    let mut s = GripControllerState::new(&cfg, Phase::Screwing);
    for k in 0..20 {
        s.on_verdict(k, Verdict::IncipientSlip, 1, 0);
    }
    assert_eq!(s.force, 60.0);
    assert_eq!(s.slip_event_log.len(), 5);
}

#[test]
fn screw_and_unscrew_meet_their_gates() {
    let cfg = HarnessConfig::default();
    for seed in 0..3 {
        let t = run_control_loop(Scenario::Screw, &cfg, seed).unwrap();
        assert!(all_passed(&control_gates(&t, &cfg.control)), "screw seed {seed}: {:?}", t.force_steps());
    }
    let t = run_control_loop(Scenario::Unscrew, &cfg, 0).unwrap();
    assert!(all_passed(&control_gates(&t, &cfg.control)), "{:?}", control_gates(&t, &cfg.control));
}

#[test]
fn sticky_cap_stalls_at_the_initial_force() {
    let mut cfg = HarnessConfig::default();
    cfg.control.cap.friction = 50.0;
    // Keeps the accumulated twist small enough for the small-motion model
    // without a rebase.
    cfg.control.max_frames = 80;
    let t = run_control_loop(Scenario::Screw, &cfg, 0).unwrap();
    assert!(t.frames.iter().all(|f| f.gt_slipping == 0));
    assert!(t.stalled);
    assert_eq!(t.termination, Termination::Stalled);
    assert_eq!(t.frames.len(), 80);
    assert!(t.events.is_empty());
    assert!(t.frames.iter().all(|f| f.force == 10.0));
}

#[test]
fn runs_are_byte_identical() {
    let cfg = HarnessConfig::default();
    for scenario in [Scenario::Screw, Scenario::Unscrew] {
        let a = serde_json::to_string(&run_control_loop(scenario, &cfg, 4).unwrap()).unwrap();
        let b = serde_json::to_string(&run_control_loop(scenario, &cfg, 4).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn paused_frames_hold_the_gripper() {
    let cfg = HarnessConfig::default();
    let t = run_control_loop(Scenario::Screw, &cfg, 1).unwrap();
    for w in t.frames.windows(2) {
        if w[1].paused {
            assert_eq!(w[1].twist, w[0].twist);
        }
    }
    assert!(t.frames.iter().any(|f| f.paused));
}
