use std::fs;
use std::path::Path;

use gelsim::{benchmark_suite, simulate, write_trial, Trial, WriteOptions, MARKERS_FILE};
use slip_harness::benchmark::{detect_stream, run_directory, run_trial, Classification};
use slip_harness::ingest::IngestRegistry;
use slip_harness::{Error, FramePath, HarnessConfig};
use tactile_slip::DecisionRecord;

fn trial(name: &str) -> Trial {
    benchmark_suite(1).into_iter().find(|t| t.name() == name).unwrap()
}

fn export(dir: &Path, t: &Trial, pgm: bool) {
    let cfg = HarnessConfig::default();
    let frames = simulate(&cfg.model, &t.object, &t.script, t.sim_seed).unwrap();
    let opts = WriteOptions {
        pgm,
        csv: true,
        texture_seed: t.texture_seed,
    };
    write_trial(dir, &cfg.model, &t.object, &t.script, &frames, t.sim_seed, Some(t.label), &opts).unwrap();
}

fn records(dir: &Path, format: Option<&str>) -> Result<Vec<DecisionRecord>, Error> {
    let cfg = HarnessConfig::default();
    let stream = IngestRegistry::default().open(dir, format, &cfg)?;
    Ok(detect_stream(stream, &cfg)?.iter().map(|d| d.record()).collect())
}

#[test]
fn csv_round_trip_matches_in_memory_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = HarnessConfig::default();
    for name in ["rubber_puck_04", "wood_block_00", "foam_sponge_01", "metal_can_20"] {
        let t = trial(name);
        let dir = tmp.path().join(name);
        export(&dir, &t, false);
        let (_, decisions) = run_trial(&t, &cfg, FramePath::Markers).unwrap();
        let memory: Vec<DecisionRecord> = decisions.iter().map(|d| d.record()).collect();
        assert_eq!(records(&dir, Some("marker_csv")).unwrap(), memory, "{name}");
        assert_eq!(records(&dir, None).unwrap(), memory, "{name} auto-detected");
    }
}

#[test]
fn csv_gap_names_the_missing_frame() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join(MARKERS_FILE);
    let mut text = String::from("frame,id,x_mm,y_mm,state\n");
    for f in [0, 1, 3] {
        text.push_str(&format!("{f},1,10.0,10.0,stuck\n"));
    }
    fs::write(&path, text).unwrap();
    match records(tmp.path(), None) {
        Err(Error::MissingFrames { missing, .. }) => assert_eq!(missing, vec![2]),
        other => panic!("expected a missing-frame error, got {other:?}"),
    }
}

#[test]
fn pgm_gap_names_the_missing_frame() {
    let tmp = tempfile::tempdir().unwrap();
    let t = trial("rubber_puck_04");
    let dir = tmp.path().join("t");
    export(&dir, &t, true);
    let frames = dir.join("frames");
    for entry in fs::read_dir(&frames).unwrap() {
        let p = entry.unwrap().path();
        let keep = ["frame_00000.pgm", "frame_00001.pgm", "frame_00003.pgm"];
        if !keep.iter().any(|k| p.ends_with(k)) {
            fs::remove_file(p).unwrap();
        }
    }
    match records(&dir, Some("pgm_sequence")) {
        Err(Error::MissingFrames { missing, .. }) => assert_eq!(missing, vec![2]),
        other => panic!("expected a missing-frame error, got {other:?}"),
    }
}

#[test]
fn malformed_rows_report_their_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("frame,id,x_mm,y_mm,state\n0,1,1.0,1.0,stuck\n0,2,abc,1.0,stuck\n", 3),
        ("frame,id,x_mm,y_mm,state\n0,1,1.0,1.0,stuck\n\n1,1,1.0,1.0\n", 4),
        ("frame,id,x_mm,y_mm,state\n0,1,1.0,1.0,melting\n", 2),
        ("frame,id,x_mm,y_mm,state,in_contact\n0,1,1.0,1.0,stuck,2\n", 2),
        ("frame,id,x_mm,y_mm,state\n0,1,NaN,1.0,stuck\n", 2),
        ("id,frame,x,y\n", 1),
    ];
    for (text, line) in cases {
        fs::write(tmp.path().join(MARKERS_FILE), text).unwrap();
        match records(tmp.path(), Some("marker_csv")) {
            Err(Error::Malformed { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
            other => panic!("expected a malformed-row error for {text:?}, got {other:?}"),
        }
    }
}

#[test]
fn csv_without_contact_column_uses_state() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = HarnessConfig::default();
    let t = trial("rubber_puck_04");
    export(tmp.path(), &t, false);
    let path = tmp.path().join(MARKERS_FILE);
    let text = fs::read_to_string(&path).unwrap();
    let stripped: String = text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            let cut = if i == 0 { "frame,id,x_mm,y_mm,state" } else { l.rsplit_once(',').unwrap().0 };
            format!("{cut}\n")
        })
        .collect();
    fs::write(&path, stripped).unwrap();
    let (_, decisions) = run_trial(&t, &cfg, FramePath::Markers).unwrap();
    let memory: Vec<DecisionRecord> = decisions.iter().map(|d| d.record()).collect();
    assert_eq!(records(tmp.path(), None).unwrap(), memory);
}

#[test]
fn format_selection_errors() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(matches!(records(tmp.path(), None), Err(Error::UndetectedFormat(_))));
    assert!(matches!(
        records(tmp.path(), Some("hdf5")),
        Err(Error::UnknownFormat { .. })
    ));
    let names = IngestRegistry::default().names();
    assert!(names.contains(&"marker_csv") && names.contains(&"pgm_sequence"));
}

#[test]
fn wrong_image_size_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let img = tactile_slip::GrayImage::filled(32, 24, 128);
    for i in 0..2 {
        tactile_slip::raster::write_pgm(&tmp.path().join(format!("frame_{i:05}.pgm")), &img).unwrap();
    }
    assert!(matches!(
        records(tmp.path(), None),
        Err(Error::GeometryMismatch { .. })
    ));
}

#[test]
fn unreadable_trial_is_indeterminate_and_the_run_continues() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = HarnessConfig::default();
    let good = trial("rubber_puck_04");
    let bad = trial("rubber_puck_05");
    export(&tmp.path().join(good.name()), &good, false);
    export(&tmp.path().join(bad.name()), &bad, false);
    let csv = tmp.path().join(bad.name()).join(MARKERS_FILE);
    let mut text = fs::read_to_string(&csv).unwrap();
    text.push_str("x,y\n");
    fs::write(&csv, text).unwrap();
    let (outcomes, table) = run_directory(tmp.path(), None, &cfg).unwrap();
    assert_eq!(outcomes.len(), 2);
    assert_eq!(outcomes[0].classification, Classification::Success);
    assert_eq!(outcomes[1].classification, Classification::Indeterminate);
    assert!(outcomes[1].diagnostic.as_deref().unwrap().contains("markers.csv"));
    assert_eq!(table.total.indeterminate, 1);
}
