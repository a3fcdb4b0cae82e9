//! Trial-level slip detection over the synthetic suite or exported trials.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use gelsim::{read_manifest, render, simulate, FrameLabel, GroundTruthFrame, Trial, TrialLabel};
use serde::{Deserialize, Serialize};
use tactile_slip::{FrameSnapshot, SlipDecision, SlipDetector, Verdict};

use crate::config::{FramePath, HarnessConfig};
use crate::error::{Error, Result};
use crate::ingest::{FrameStream, IngestRegistry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detected {
    Slip,
    NoSlip,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Success,
    FalsePositive,
    FalseNegative,
    Indeterminate,
}

impl Classification {
    pub fn of(ground_truth: TrialLabel, detected: Detected) -> Self {
        match (ground_truth, detected) {
            (_, Detected::Indeterminate) => Classification::Indeterminate,
            (TrialLabel::Slip, Detected::Slip) | (TrialLabel::NoSlip, Detected::NoSlip) => {
                Classification::Success
            }
            (TrialLabel::NoSlip, Detected::Slip) => Classification::FalsePositive,
            (TrialLabel::Slip, Detected::NoSlip) => Classification::FalseNegative,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub object: String,
    pub trial_id: usize,
    pub ground_truth: TrialLabel,
    pub detected: Detected,
    pub classification: Classification,
    /// Frames from the first ground-truth slipping frame to the first
    /// IncipientSlip verdict; negative when the detector fired first.
    pub detection_latency: Option<i64>,
    pub first_detection: Option<u64>,
    pub gt_onset: Option<u64>,
    /// Mean distance to the contact boundary of the markers flagged at the
    /// first detection, mm.
    pub slipped_boundary_mm: Option<f64>,
    /// Same, over every contact marker of that frame.
    pub contact_boundary_mm: Option<f64>,
    pub frames: usize,
    pub diagnostic: Option<String>,
}

impl TrialOutcome {
    fn failed(object: String, trial_id: usize, ground_truth: TrialLabel, err: &Error) -> Self {
        Self {
            object,
            trial_id,
            ground_truth,
            detected: Detected::Indeterminate,
            classification: Classification::Indeterminate,
            detection_latency: None,
            first_detection: None,
            gt_onset: None,
            slipped_boundary_mm: None,
            contact_boundary_mm: None,
            frames: 0,
            diagnostic: Some(err.to_string()),
        }
    }
}

/// Runs one detector over a stream: the first frame becomes the reference,
/// every later frame yields a decision.
pub fn detect_stream<I>(frames: I, cfg: &HarnessConfig) -> Result<Vec<SlipDecision>>
where
    I: IntoIterator<Item = Result<FrameSnapshot>>,
{
    let mut detector = SlipDetector::new(cfg.detector.clone())?;
    let mut decisions = Vec::new();
    let mut first = true;
    for frame in frames {
        let frame = frame?;
        if first {
            detector.set_reference(&frame);
            first = false;
        } else {
            decisions.push(detector.step(&frame)?);
        }
    }
    Ok(decisions)
}

/// Detector input for one simulated frame along `path`.
pub fn snapshot(
    frame: &GroundTruthFrame,
    trial: &Trial,
    cfg: &HarnessConfig,
    path: FramePath,
) -> Result<FrameSnapshot> {
    let model = &cfg.model;
    Ok(match path {
        FramePath::Markers => FrameSnapshot::from_markers(
            frame.index,
            model.geometry,
            frame.observations(model),
            &cfg.marker_mask,
        ),
        FramePath::Raster => {
            let img = render(frame, model, &trial.object, trial.texture_seed);
            FrameSnapshot::from_image(frame.index, img, model.geometry, &cfg.raster)?
        }
    })
}

/// Simulates `trial` and returns its ground truth with the detector's
/// decisions.
pub fn run_trial(
    trial: &Trial,
    cfg: &HarnessConfig,
    path: FramePath,
) -> Result<(Vec<GroundTruthFrame>, Vec<SlipDecision>)> {
    let frames = simulate(&cfg.model, &trial.object, &trial.script, trial.sim_seed)?;
    let decisions = detect_stream(frames.iter().map(|f| snapshot(f, trial, cfg, path)), cfg)?;
    Ok((frames, decisions))
}

/// First frame whose ground truth has any marker slipping.
pub fn gt_onset(labels: &[FrameLabel]) -> Option<u64> {
    labels
        .iter()
        .position(|&l| l != FrameLabel::NoSlip)
        .map(|i| i as u64)
}

/// Trial-level verdict. A trial is detected-slip if any decision is
/// IncipientSlip; with an onset window, a slip trial only counts detections
/// from its onset to `onset + window`. A trial whose every decision is
/// Indeterminate is indeterminate.
pub fn classify(
    object: &str,
    trial_id: usize,
    ground_truth: TrialLabel,
    labels: &[FrameLabel],
    decisions: &[SlipDecision],
    onset_window: Option<u64>,
) -> TrialOutcome {
    let onset = gt_onset(labels);
    let counts = |d: &SlipDecision| match (ground_truth, onset, onset_window) {
        (TrialLabel::Slip, Some(o), Some(w)) => d.frame >= o && d.frame <= o + w,
        _ => true,
    };
    let first = decisions
        .iter()
        .find(|d| d.verdict == Verdict::IncipientSlip && counts(d));
    let detected = if first.is_some() {
        Detected::Slip
    } else if !decisions.is_empty() && decisions.iter().all(|d| d.verdict == Verdict::Indeterminate) {
        Detected::Indeterminate
    } else {
        Detected::NoSlip
    };
    let field = first.and_then(|d| d.slip_field.as_ref());
    TrialOutcome {
        object: object.to_owned(),
        trial_id,
        ground_truth,
        detected,
        classification: Classification::of(ground_truth, detected),
        detection_latency: match (first, onset) {
            (Some(d), Some(o)) => Some(d.frame as i64 - o as i64),
            _ => None,
        },
        first_detection: first.map(|d| d.frame),
        gt_onset: onset,
        slipped_boundary_mm: field.and_then(|f| f.mean_boundary_distance(true)),
        contact_boundary_mm: field.and_then(|f| f.mean_boundary_distance(false)),
        frames: decisions.len() + 1,
        diagnostic: None,
    }
}

pub fn evaluate_trial(trial: &Trial, cfg: &HarnessConfig, path: FramePath) -> TrialOutcome {
    match run_trial(trial, cfg, path) {
        Ok((frames, decisions)) => {
            let labels: Vec<FrameLabel> = frames.iter().map(|f| f.label).collect();
            classify(
                &trial.object.name,
                trial.trial_id,
                trial.label,
                &labels,
                &decisions,
                cfg.benchmark.onset_window,
            )
        }
        Err(e) => TrialOutcome::failed(trial.object.name.clone(), trial.trial_id, trial.label, &e),
    }
}

/// Maps `f` over `items` on all available cores; output order follows input
/// order.
pub fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync) -> Vec<U> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len().max(1));
    let chunk = items.len().div_ceil(workers).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<U>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("benchmark worker panicked"))
            .collect()
    })
}

/// Runs every trial; outcomes are ordered as `trials`.
pub fn run_benchmark(trials: &[Trial], cfg: &HarnessConfig, path: FramePath) -> (Vec<TrialOutcome>, MetricsTable) {
    let outcomes = par_map(trials, |t| evaluate_trial(t, cfg, path));
    let table = MetricsTable::from_outcomes(&outcomes);
    (outcomes, table)
}

/// Runs every trial directory under `root` (subdirectories holding a
/// manifest with a trial label), in name order. A trial that cannot be
/// read is indeterminate; the run continues.
pub fn run_directory(
    root: &Path,
    format: Option<&str>,
    cfg: &HarnessConfig,
) -> Result<(Vec<TrialOutcome>, MetricsTable)> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(root)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    let registry = IngestRegistry::default();
    let mut per_object: BTreeMap<String, usize> = BTreeMap::new();
    let mut jobs = Vec::new();
    for dir in dirs {
        let Ok(manifest) = read_manifest(&dir) else { continue };
        let Some(label) = manifest.trial_label else { continue };
        let n = per_object.entry(manifest.object.name.clone()).or_default();
        jobs.push((dir, manifest.object.name.clone(), *n, label, manifest.labels));
        *n += 1;
    }
    let outcomes = par_map(&jobs, |(dir, object, id, label, labels)| {
        let run = || -> Result<Vec<SlipDecision>> {
            let stream: FrameStream = registry.open(dir, format, cfg)?;
            detect_stream(stream, cfg)
        };
        match run() {
            Ok(decisions) => classify(object, *id, *label, labels, &decisions, cfg.benchmark.onset_window),
            Err(e) => TrialOutcome::failed(object.clone(), *id, *label, &e),
        }
    });
    let table = MetricsTable::from_outcomes(&outcomes);
    Ok((outcomes, table))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub object: String,
    pub trials: usize,
    pub success: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub indeterminate: usize,
    /// Percentages of `trials`.
    pub success_rate: f64,
    pub fp_rate: f64,
    pub fn_rate: f64,
    pub indeterminate_rate: f64,
}

impl MetricsRow {
    fn from_counts(object: String, counts: [usize; 4]) -> Self {
        let trials: usize = counts.iter().sum();
        let pct = |n: usize| if trials == 0 { 0.0 } else { 100.0 * n as f64 / trials as f64 };
        Self {
            object,
            trials,
            success: counts[0],
            false_positives: counts[1],
            false_negatives: counts[2],
            indeterminate: counts[3],
            success_rate: pct(counts[0]),
            fp_rate: pct(counts[1]),
            fn_rate: pct(counts[2]),
            indeterminate_rate: pct(counts[3]),
        }
    }

    pub fn rate_sum(&self) -> f64 {
        self.success_rate + self.fp_rate + self.fn_rate + self.indeterminate_rate
    }
}

type RateOf = fn(&MetricsRow) -> f64;

/// Per-object rows in first-seen order, plus the trial-weighted total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub objects: Vec<MetricsRow>,
    pub total: MetricsRow,
}

fn slot(c: Classification) -> usize {
    match c {
        Classification::Success => 0,
        Classification::FalsePositive => 1,
        Classification::FalseNegative => 2,
        Classification::Indeterminate => 3,
    }
}

impl MetricsTable {
    pub fn from_outcomes(outcomes: &[TrialOutcome]) -> Self {
        let mut order: Vec<String> = Vec::new();
        let mut counts: BTreeMap<&str, [usize; 4]> = BTreeMap::new();
        let mut total = [0usize; 4];
        for o in outcomes {
            if !counts.contains_key(o.object.as_str()) {
                order.push(o.object.clone());
            }
            counts.entry(&o.object).or_default()[slot(o.classification)] += 1;
            total[slot(o.classification)] += 1;
        }
        let objects = order
            .iter()
            .map(|name| MetricsRow::from_counts(name.clone(), counts[name.as_str()]))
            .collect();
        Self {
            objects,
            total: MetricsRow::from_counts("Total".into(), total),
        }
    }

    pub fn row(&self, object: &str) -> Option<&MetricsRow> {
        self.objects.iter().find(|r| r.object == object)
    }

    /// Objects as columns, outcome classes as rows, percentages with two
    /// decimals.
    pub fn to_csv(&self) -> String {
        let columns: Vec<&MetricsRow> = self.objects.iter().chain(std::iter::once(&self.total)).collect();
        let mut out = String::from("metric");
        for c in &columns {
            out.push(',');
            out.push_str(&c.object);
        }
        out.push('\n');
        let rows: [(&str, RateOf); 4] = [
            ("Success Rate", |r| r.success_rate),
            ("Failure (False Positives)", |r| r.fp_rate),
            ("Failure (False Negatives)", |r| r.fn_rate),
            ("Indeterminate", |r| r.indeterminate_rate),
        ];
        for (name, get) in rows {
            out.push_str(name);
            for c in &columns {
                out.push_str(&format!(",{:.2}", get(c)));
            }
            out.push('\n');
        }
        out
    }
}
