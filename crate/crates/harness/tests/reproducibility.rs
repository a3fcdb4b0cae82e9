use std::fs;

use gelsim::benchmark_suite;
use slip_harness::benchmark::run_benchmark;
use slip_harness::latency::{bench_latency, block_patch, full_patch, twist_frames};
use slip_harness::report::{write_benchmark, METRICS_CSV, METRICS_JSON, OUTCOMES_JSON};
use slip_harness::{FramePath, HarnessConfig};

#[test]
fn benchmark_reports_are_byte_identical() {
    let cfg = HarnessConfig::default();
    let trials: Vec<_> = benchmark_suite(cfg.suite.seed)
        .into_iter()
        .filter(|t| t.object.name == "glass_jar" || t.object.name == "steel_bar")
        .collect();
    let tmp = tempfile::tempdir().unwrap();
    for run in ["a", "b"] {
        let (outcomes, table) = run_benchmark(&trials, &cfg, FramePath::Markers);
        write_benchmark(&tmp.path().join(run), &table, &outcomes).unwrap();
    }
    for file in [METRICS_CSV, METRICS_JSON, OUTCOMES_JSON] {
        let a = fs::read(tmp.path().join("a").join(file)).unwrap();
        let b = fs::read(tmp.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
}

#[test]
fn latency_decisions_do_not_depend_on_timing() {
    let mut cfg = HarnessConfig::default();
    cfg.latency.frames = 60;
    let a = bench_latency(&cfg, 9).unwrap();
    let b = bench_latency(&cfg, 9).unwrap();
    assert_eq!(a.full_decisions, b.full_decisions);
    assert_eq!(a.small_decisions, b.small_decisions);
    assert_eq!(a.report.full.markers, 475);
    assert_eq!(a.report.small.markers, 100);
}

#[test]
fn latency_patches_cover_the_intended_markers() {
    let cfg = HarnessConfig::default();
    let full = twist_frames(&cfg, &full_patch(&cfg), 3, 0).unwrap();
    assert!(full.iter().all(|f| f.markers.len() == 475 && f.contact_markers() == 475));
    for n in [25, 100, 144] {
        let small = twist_frames(&cfg, &block_patch(&cfg, n), 3, 0).unwrap();
        assert!(small.iter().all(|f| f.markers.len() == n), "{n}");
    }
}
