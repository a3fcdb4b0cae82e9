//! Trial directories on disk into frame streams.
//!
//! A trial directory holds `markers.csv`, `frames/frame_NNNNN.pgm`, or
//! both, plus an optional `manifest.json` whose geometry overrides the
//! configured one.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use gelsim::{read_manifest, FRAMES_DIR, MANIFEST_FILE, MARKERS_FILE};
use tactile_slip::raster::read_pgm;
use tactile_slip::{FrameSnapshot, MarkerObservation, SensorGeometry, Vec2};

use crate::config::HarnessConfig;
use crate::error::{Error, Result};

pub type FrameStream = Box<dyn Iterator<Item = Result<FrameSnapshot>>>;

/// A readable trial layout.
pub trait IngestFormat: Send + Sync {
    fn name(&self) -> &'static str;
    /// Whether `dir` holds data in this format.
    fn present(&self, dir: &Path) -> bool;
    /// Checks the frame numbering up front, then yields frames in index
    /// order.
    fn open(&self, dir: &Path, cfg: &HarnessConfig) -> Result<FrameStream>;
}

pub struct IngestRegistry {
    formats: Vec<Box<dyn IngestFormat>>,
}

impl Default for IngestRegistry {
    fn default() -> Self {
        let mut r = Self { formats: Vec::new() };
        r.register(Box::new(MarkerCsv));
        r.register(Box::new(PgmSequence));
        r
    }
}

impl IngestRegistry {
    /// Adds a format; a format with the same name is replaced.
    pub fn register(&mut self, format: Box<dyn IngestFormat>) {
        self.formats.retain(|f| f.name() != format.name());
        self.formats.push(format);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.formats.iter().map(|f| f.name()).collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn IngestFormat> {
        self.formats
            .iter()
            .find(|f| f.name() == name)
            .map(|f| f.as_ref())
            .ok_or_else(|| Error::UnknownFormat {
                name: name.to_owned(),
                known: self.names().join(", "),
            })
    }

    /// First registered format present in `dir`.
    pub fn detect(&self, dir: &Path) -> Result<&dyn IngestFormat> {
        self.formats
            .iter()
            .find(|f| f.present(dir))
            .map(|f| f.as_ref())
            .ok_or_else(|| Error::UndetectedFormat(dir.to_owned()))
    }

    pub fn open(&self, dir: &Path, format: Option<&str>, cfg: &HarnessConfig) -> Result<FrameStream> {
        let f = match format {
            Some(name) => self.get(name)?,
            None => self.detect(dir)?,
        };
        f.open(dir, cfg)
    }
}

fn geometry(dir: &Path, cfg: &HarnessConfig) -> Result<SensorGeometry> {
    if dir.join(MANIFEST_FILE).is_file() {
        Ok(read_manifest(dir)?.geometry)
    } else {
        Ok(cfg.model.geometry)
    }
}

/// Indices in `min..=max` absent from `seen`.
fn gaps(seen: &BTreeSet<u64>) -> Vec<u64> {
    match (seen.first(), seen.last()) {
        (Some(&lo), Some(&hi)) => (lo..=hi).filter(|i| !seen.contains(i)).collect(),
        _ => Vec::new(),
    }
}

/// Marker tables: `frame,id,x_mm,y_mm,state[,in_contact]`. Without the
/// `in_contact` column a marker is in contact unless its state is
/// `out_of_contact`. Bypasses the raster pipeline.
pub struct MarkerCsv;

impl IngestFormat for MarkerCsv {
    fn name(&self) -> &'static str {
        "marker_csv"
    }

    fn present(&self, dir: &Path) -> bool {
        dir.join(MARKERS_FILE).is_file()
    }

    fn open(&self, dir: &Path, cfg: &HarnessConfig) -> Result<FrameStream> {
        let geom = geometry(dir, cfg)?;
        let path = dir.join(MARKERS_FILE);
        let frames = parse_marker_csv(&path, &fs::read_to_string(&path)?, cfg)?;
        if frames.is_empty() {
            return Err(Error::Empty(dir.to_owned()));
        }
        let seen: BTreeSet<u64> = frames.keys().copied().collect();
        let missing = gaps(&seen);
        if !missing.is_empty() {
            return Err(Error::MissingFrames { dir: dir.to_owned(), missing });
        }
        let mask = cfg.marker_mask;
        Ok(Box::new(frames.into_iter().map(move |(index, markers)| {
            Ok(FrameSnapshot::from_markers(index, geom, markers, &mask))
        })))
    }
}

fn parse_marker_csv(
    path: &Path,
    text: &str,
    cfg: &HarnessConfig,
) -> Result<BTreeMap<u64, Vec<MarkerObservation>>> {
    let bad = |line: usize, reason: String| Error::Malformed {
        file: path.to_owned(),
        line,
        reason,
    };
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, l)| l.trim()).unwrap_or_default();
    let with_contact = match header {
        "frame,id,x_mm,y_mm,state" => false,
        "frame,id,x_mm,y_mm,state,in_contact" => true,
        other => return Err(bad(1, format!("unexpected header '{other}'"))),
    };
    let r = cfg.model.render.marker_radius_px;
    let area = (std::f64::consts::PI * r * r).round() as u32;
    let mut frames: BTreeMap<u64, Vec<MarkerObservation>> = BTreeMap::new();
    for (i, line) in lines {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let expected = if with_contact { 6 } else { 5 };
        if cols.len() != expected {
            return Err(bad(n, format!("{} columns, expected {expected}", cols.len())));
        }
        let frame: u64 = cols[0].parse().map_err(|_| bad(n, format!("frame '{}'", cols[0])))?;
        let id: u32 = cols[1].parse().map_err(|_| bad(n, format!("id '{}'", cols[1])))?;
        let coord = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(n, format!("coordinate '{s}'")))
        };
        let position = Vec2::new(coord(cols[2])?, coord(cols[3])?);
        let touching = match cols[4] {
            "stuck" | "slipping" => true,
            "out_of_contact" => false,
            other => return Err(bad(n, format!("state '{other}'"))),
        };
        let in_contact = if with_contact {
            match cols[5] {
                "1" => true,
                "0" => false,
                other => return Err(bad(n, format!("in_contact '{other}'"))),
            }
        } else {
            touching
        };
        frames.entry(frame).or_default().push(MarkerObservation {
            id,
            position,
            area_px: area,
            in_contact,
        });
    }
    Ok(frames)
}

/// Rendered frames `frame_NNNNN.pgm`, in `frames/` or directly in the
/// trial directory. Each goes through contact extraction and marker
/// localization.
pub struct PgmSequence;

impl PgmSequence {
    fn frames_dir(dir: &Path) -> PathBuf {
        let nested = dir.join(FRAMES_DIR);
        if nested.is_dir() {
            nested
        } else {
            dir.to_owned()
        }
    }

    fn index_of(name: &str) -> Option<u64> {
        name.strip_prefix("frame_")?.strip_suffix(".pgm")?.parse().ok()
    }

    fn list(dir: &Path) -> Result<BTreeMap<u64, PathBuf>> {
        let mut out = BTreeMap::new();
        for entry in fs::read_dir(Self::frames_dir(dir))? {
            let entry = entry?;
            if let Some(i) = entry.file_name().to_str().and_then(Self::index_of) {
                out.insert(i, entry.path());
            }
        }
        Ok(out)
    }
}

impl IngestFormat for PgmSequence {
    fn name(&self) -> &'static str {
        "pgm_sequence"
    }

    fn present(&self, dir: &Path) -> bool {
        Self::list(dir).is_ok_and(|l| !l.is_empty())
    }

    fn open(&self, dir: &Path, cfg: &HarnessConfig) -> Result<FrameStream> {
        let geom = geometry(dir, cfg)?;
        let files = Self::list(dir)?;
        if files.is_empty() {
            return Err(Error::Empty(dir.to_owned()));
        }
        let missing = gaps(&files.keys().copied().collect());
        if !missing.is_empty() {
            return Err(Error::MissingFrames { dir: dir.to_owned(), missing });
        }
        let raster = cfg.raster;
        Ok(Box::new(files.into_iter().map(move |(index, path)| {
            let img = read_pgm(&path)?;
            if img.width() != geom.width_px || img.height() != geom.height_px {
                return Err(Error::GeometryMismatch {
                    path,
                    got: format!("{}x{}", img.width(), img.height()),
                    expected: format!("{}x{}", geom.width_px, geom.height_px),
                });
            }
            Ok(FrameSnapshot::from_image(index, img, geom, &raster)?)
        })))
    }
}
