//! Pass/fail checks behind `--check`.

use serde::{Deserialize, Serialize};

use crate::benchmark::MetricsTable;
use crate::config::ControlConfig;
use crate::control::{ControlTrace, Scenario, Termination};
use crate::latency::LatencyReport;

pub const MIN_ACCURACY_PCT: f64 = 85.0;
pub const MAX_FP_PCT: f64 = 5.0;
/// The unscrew run must see its first slip within this fraction of its
/// frames.
pub const EARLY_SLIP_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Gate {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_owned(),
            passed,
            detail,
        }
    }
}

pub fn all_passed(gates: &[Gate]) -> bool {
    gates.iter().all(|g| g.passed)
}

pub fn benchmark_gates(table: &MetricsTable) -> Vec<Gate> {
    let t = &table.total;
    let mut gates = vec![
        Gate::new(
            "accuracy",
            t.success_rate >= MIN_ACCURACY_PCT,
            format!("{:.2}% >= {MIN_ACCURACY_PCT}%", t.success_rate),
        ),
        Gate::new(
            "false_positive_rate",
            t.fp_rate <= MAX_FP_PCT,
            format!("{:.2}% <= {MAX_FP_PCT}%", t.fp_rate),
        ),
    ];
    let worst = table
        .objects
        .iter()
        .chain(std::iter::once(t))
        .map(|r| (r.rate_sum() - 100.0).abs())
        .fold(0.0, f64::max);
    gates.push(Gate::new(
        "rows_sum_to_100",
        worst <= 0.01,
        format!("largest deviation {worst:.2e}"),
    ));
    gates
}

pub fn latency_gates(report: &LatencyReport) -> Vec<Gate> {
    vec![
        Gate::new(
            "median_step_within_budget",
            report.within_budget,
            format!("{:.3} ms < {} ms", report.full.median_ms, report.budget_ms),
        ),
        Gate::new(
            "smaller_patch_faster",
            report.small_faster,
            format!("{:.3} ms < {:.3} ms", report.small.median_ms, report.full.median_ms),
        ),
    ]
}

/// Force trace shape: starts at the initial force, never decreases, moves in
/// exact steps and never exceeds the maximum.
pub fn force_trace_gate(trace: &ControlTrace, cfg: &ControlConfig) -> Gate {
    let steps = trace.force_steps();
    let exact = steps.first() == Some(&cfg.initial_force)
        && steps.windows(2).all(|w| w[1] - w[0] == cfg.force_step);
    let frames_ok = trace
        .frames
        .windows(2)
        .all(|w| w[1].force >= w[0].force)
        && trace.frames.iter().all(|f| f.force <= cfg.max_force);
    Gate::new(
        "force_trace",
        exact && frames_ok,
        format!("steps {steps:?}"),
    )
}

pub fn control_gates(trace: &ControlTrace, cfg: &ControlConfig) -> Vec<Gate> {
    let mut gates = vec![force_trace_gate(trace, cfg)];
    match trace.scenario {
        Scenario::Screw => gates.push(Gate::new(
            "screw_reaches_max",
            trace.final_force == cfg.max_force && trace.termination == Termination::MaxForce,
            format!("final {} N, {:?}", trace.final_force, trace.termination),
        )),
        Scenario::Unscrew => {
            let n = trace.frames.len();
            let first = trace.first_slip_frame();
            gates.push(Gate::new(
                "unscrew_early_slip",
                first.is_some_and(|f| (f as f64) < EARLY_SLIP_FRACTION * n as f64),
                format!("first slip {first:?} of {n} frames"),
            ));
            gates.push(Gate::new(
                "unscrew_below_max",
                trace.final_force < cfg.max_force && trace.termination == Termination::Dwell,
                format!("final {} N, {:?}", trace.final_force, trace.termination),
            ));
        }
    }
    gates
}
