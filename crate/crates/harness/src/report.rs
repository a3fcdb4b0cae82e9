//! Report files. Contents depend only on config and seeds; nothing
//! time-dependent is written except in latency reports.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use tactile_slip::DecisionRecord;

use crate::benchmark::{MetricsTable, TrialOutcome};
use crate::error::Result;

pub const METRICS_CSV: &str = "metrics.csv";
pub const METRICS_JSON: &str = "metrics.json";
pub const OUTCOMES_JSON: &str = "outcomes.json";
pub const LATENCY_JSON: &str = "latency.json";

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// `metrics.csv`, `metrics.json` and `outcomes.json` in `dir`.
pub fn write_benchmark(dir: &Path, table: &MetricsTable, outcomes: &[TrialOutcome]) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(METRICS_CSV), table.to_csv())?;
    write_json(&dir.join(METRICS_JSON), table)?;
    write_json(&dir.join(OUTCOMES_JSON), outcomes)
}

/// One JSON object per line.
pub fn write_decisions<W: Write>(out: W, records: &[DecisionRecord]) -> Result<()> {
    let mut out = BufWriter::new(out);
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_decisions(text: &str) -> Result<Vec<DecisionRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

pub fn read_metrics(dir: &Path) -> Result<MetricsTable> {
    Ok(serde_json::from_str(&fs::read_to_string(dir.join(METRICS_JSON))?)?)
}

pub fn read_outcomes(dir: &Path) -> Result<Vec<TrialOutcome>> {
    Ok(serde_json::from_str(&fs::read_to_string(dir.join(OUTCOMES_JSON))?)?)
}
