//! Benchmark manifest: one JSON document listing every evaluation entry.
//!
//! ```json
//! {
//!   "format": "vcbench-manifest",
//!   "version": 1,
//!   "entries": [ { "id": "...", "start_window": [0, 47], ... } ]
//! }
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MANIFEST_FORMAT: &str = "vcbench-manifest";
pub const MANIFEST_VERSION: u32 = 1;

/// Inclusive frame range `[first, last]`, serialized as a two-element array.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrameWindow(pub usize, pub usize);

impl FrameWindow {
    pub fn new(first: usize, last: usize) -> Self {
        FrameWindow(first, last)
    }

    pub fn first(&self) -> usize {
        self.0
    }

    pub fn last(&self) -> usize {
        self.1
    }

    pub fn len(&self) -> usize {
        self.1 + 1 - self.0
    }

    pub fn is_empty(&self) -> bool {
        self.1 < self.0
    }

    /// Half-open range over the same frames.
    pub fn range(&self) -> std::ops::Range<usize> {
        self.0..self.1 + 1
    }

    pub fn overlaps(&self, other: &FrameWindow) -> bool {
        self.0 <= other.1 && other.0 <= self.1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub id: String,
    pub path: PathBuf,
    pub category: String,
    pub subcategory: String,
    pub caption: String,
    pub fps: f64,
    pub duration_seconds: f64,
    pub aesthetic_score: f64,
    pub scene_cuts: Vec<usize>,
    pub start_window: FrameWindow,
    pub end_window: FrameWindow,
}

impl ManifestEntry {
    pub fn frame_count(&self) -> usize {
        (self.duration_seconds * self.fps).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str| format!("{}.{name}", self.id);
        if self.id.is_empty() {
            return Err(Error::manifest("id", "must not be empty"));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(Error::manifest(field("fps"), format!("must be positive, got {}", self.fps)));
        }
        if !(self.duration_seconds.is_finite() && self.duration_seconds > 0.0) {
            return Err(Error::manifest(
                field("duration_seconds"),
                format!("must be positive, got {}", self.duration_seconds),
            ));
        }
        if !(0.0..=1.0).contains(&self.aesthetic_score) {
            return Err(Error::manifest(
                field("aesthetic_score"),
                format!("must lie in [0, 1], got {}", self.aesthetic_score),
            ));
        }
        if self.scene_cuts.first() == Some(&0) || self.scene_cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::manifest(field("scene_cuts"), "must be strictly increasing"));
        }
        for (name, w) in [("start_window", &self.start_window), ("end_window", &self.end_window)] {
            if w.is_empty() {
                return Err(Error::manifest(field(name), format!("first {} exceeds last {}", w.0, w.1)));
            }
        }
        if self.start_window.overlaps(&self.end_window) {
            return Err(Error::manifest(field("end_window"), "overlaps start_window"));
        }
        if self.start_window.last() >= self.end_window.first() {
            return Err(Error::manifest(field("end_window"), "must come after start_window"));
        }
        let n = self.frame_count();
        if self.end_window.last() >= n {
            return Err(Error::manifest(
                field("end_window"),
                format!("frame {} beyond video length {n}", self.end_window.last()),
            ));
        }
        if let Some(&c) = self.scene_cuts.last() {
            if c >= n {
                return Err(Error::manifest(field("scene_cuts"), format!("cut {c} beyond video length {n}")));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestDoc {
    format: String,
    version: u32,
    entries: Vec<ManifestEntry>,
}

pub fn manifest_to_string(entries: &[ManifestEntry]) -> Result<String> {
    for e in entries {
        e.validate()?;
    }
    let doc = ManifestDoc {
        format: MANIFEST_FORMAT.to_string(),
        version: MANIFEST_VERSION,
        entries: entries.to_vec(),
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn manifest_from_str(text: &str) -> Result<Vec<ManifestEntry>> {
    let doc: ManifestDoc =
        serde_json::from_str(text).map_err(|e| Error::manifest(field_of(&e), e.to_string()))?;
    if doc.format != MANIFEST_FORMAT {
        return Err(Error::manifest("format", format!("expected `{MANIFEST_FORMAT}`, got `{}`", doc.format)));
    }
    if doc.version != MANIFEST_VERSION {
        return Err(Error::manifest("version", format!("unsupported version {}", doc.version)));
    }
    let mut seen = std::collections::HashSet::new();
    for e in &doc.entries {
        e.validate()?;
        if !seen.insert(e.id.as_str()) {
            return Err(Error::manifest("id", format!("duplicate id `{}`", e.id)));
        }
    }
    Ok(doc.entries)
}

// serde_json reports missing/unknown fields as "missing field `x`"; pull the name out.
fn field_of(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    msg.split('`').nth(1).unwrap_or("<document>").to_string()
}

pub fn save_manifest(entries: &[ManifestEntry], path: &Path) -> Result<()> {
    fs::write(path, manifest_to_string(entries)?)?;
    Ok(())
}

pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    manifest_from_str(&fs::read_to_string(path)?)
}
