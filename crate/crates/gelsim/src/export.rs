use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use tactile_slip::raster::write_pgm;
use tactile_slip::SensorGeometry;

use crate::error::Result;
use crate::model::GelModel;
use crate::object::ObjectSpec;
use crate::render::render;
use crate::script::LoadScript;
use crate::sim::{FrameLabel, GroundTruthFrame, MarkerState};
use crate::suite::TrialLabel;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MARKERS_FILE: &str = "markers.csv";
pub const FRAMES_DIR: &str = "frames";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WriteOptions {
    pub pgm: bool,
    pub csv: bool,
    pub texture_seed: u64,
}

impl Default for WriteOptions {
    fn default() -> Self {
        Self {
            pgm: true,
            csv: true,
            texture_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialManifest {
    pub geometry: SensorGeometry,
    pub frame_count: usize,
    pub marker_count: usize,
    pub object: ObjectSpec,
    pub script: LoadScript,
    pub labels: Vec<FrameLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial_label: Option<TrialLabel>,
    pub seed: u64,
    pub texture_seed: u64,
    pub has_pgm: bool,
    pub has_csv: bool,
}

fn state_name(s: MarkerState) -> &'static str {
    match s {
        MarkerState::Stuck => "stuck",
        MarkerState::Slipping => "slipping",
        MarkerState::OutOfContact => "out_of_contact",
    }
}

pub fn frame_file_name(index: u64) -> String {
    format!("frame_{index:05}.pgm")
}

/// Writes a trial directory: `manifest.json`, `markers.csv` with columns
/// `frame,id,x_mm,y_mm,state,in_contact` (`in_contact` is what the sensor
/// registers: 0 everywhere when the imprint is too faint), and `frames/frame_NNNNN.pgm`.
#[allow(clippy::too_many_arguments)]
pub fn write_trial(
    dir: &Path,
    model: &GelModel,
    obj: &ObjectSpec,
    script: &LoadScript,
    frames: &[GroundTruthFrame],
    seed: u64,
    trial_label: Option<TrialLabel>,
    opts: &WriteOptions,
) -> Result<TrialManifest> {
    fs::create_dir_all(dir)?;
    if opts.csv {
        let mut out = BufWriter::new(fs::File::create(dir.join(MARKERS_FILE))?);
        writeln!(out, "frame,id,x_mm,y_mm,state,in_contact")?;
        for f in frames {
            for (i, (p, s)) in f.positions.iter().zip(&f.states).enumerate() {
                let seen = f.contact_visible && *s != MarkerState::OutOfContact;
                writeln!(out, "{},{},{},{},{},{}", f.index, i + 1, p.x, p.y, state_name(*s), u8::from(seen))?;
            }
        }
        out.flush()?;
    }
    if opts.pgm {
        let frames_dir = dir.join(FRAMES_DIR);
        fs::create_dir_all(&frames_dir)?;
        for f in frames {
            let img = render(f, model, obj, opts.texture_seed);
            write_pgm(&frames_dir.join(frame_file_name(f.index)), &img)?;
        }
    }
    let manifest = TrialManifest {
        geometry: model.geometry,
        frame_count: frames.len(),
        marker_count: model.marker_count(),
        object: obj.clone(),
        script: script.clone(),
        labels: frames.iter().map(|f| f.label).collect(),
        trial_label,
        seed,
        texture_seed: opts.texture_seed,
        has_pgm: opts.pgm,
        has_csv: opts.csv,
    };
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<TrialManifest> {
    let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    Ok(serde_json::from_str(&text)?)
}
