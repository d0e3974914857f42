//! Benchmark construction from a directory of raw videos.
//!
//! Per file: decode, detect scenes (reject more than two), reject periodic
//! motion, gate on aesthetic score, then place the start/end clip windows.

pub mod clips;
pub mod scenes;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::{aesthetic_score, FrameScorer};
use crate::media::{decode_video, FrameSequence, ManifestEntry};
use crate::pixel::{periodicity_detect, PeriodParams, PeriodReport};

pub use clips::{extract_clip_windows, ClipExtractionPolicy, ClipWindows};
pub use scenes::{detect_scenes, SceneCutList, SceneParams};

/// File extensions treated as videos when scanning a directory.
pub const VIDEO_EXTENSIONS: [&str; 7] = ["y4m", "mp4", "mov", "mkv", "webm", "avi", "m4v"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicVerdict {
    pub accepted: bool,
    pub report: PeriodReport,
}

/// Rejects videos with detected periodic motion. A static video is accepted
/// with `report.degenerate` set.
pub fn filter_periodic(video: &FrameSequence, params: &PeriodParams) -> Result<PeriodicVerdict> {
    let report = periodicity_detect(video, params)?;
    Ok(PeriodicVerdict {
        accepted: !report.is_periodic,
        report,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AestheticOutcome {
    pub kept: Vec<ManifestEntry>,
    /// Entries scored below the threshold, with their score.
    pub dropped: Vec<(String, f64)>,
    /// Entries whose video or scorer failed, with the error.
    pub unscored: Vec<(String, String)>,
}

/// Keeps entries whose normalized mean aesthetic score is at least `min_normalized`,
/// writing the score into `aesthetic_score`.
pub fn aesthetic_filter(
    entries: Vec<ManifestEntry>,
    load: impl Fn(&ManifestEntry) -> Result<FrameSequence>,
    scorer: &dyn FrameScorer,
    min_normalized: f64,
) -> AestheticOutcome {
    let mut out = AestheticOutcome::default();
    for mut entry in entries {
        match load(&entry).and_then(|v| aesthetic_score(&v, scorer)) {
            Ok(score) if score >= min_normalized => {
                entry.aesthetic_score = score;
                out.kept.push(entry);
            }
            Ok(score) => out.dropped.push((entry.id, score)),
            Err(e) => {
                log::warn!("{}: aesthetic scoring failed: {e}", entry.id);
                out.unscored.push((entry.id, e.to_string()));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildConfig {
    pub scenes: SceneParams,
    pub period: PeriodParams,
    pub policy: ClipExtractionPolicy,
    pub min_aesthetic: f64,
    pub seed: u64,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            scenes: SceneParams::default(),
            period: PeriodParams::default(),
            policy: ClipExtractionPolicy::default(),
            min_aesthetic: 0.5,
            seed: 0,
        }
    }
}

/// Why a file produced no entry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub file: String,
    pub stage: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    /// `counts[i]` covers `[i * bin_width, (i + 1) * bin_width)`.
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn of(values: &[f64], bin_width: f64, min_bins: usize) -> Self {
        let mut counts = vec![0; min_bins];
        for v in values {
            let b = (v.max(0.0) / bin_width).floor() as usize;
            if b >= counts.len() {
                counts.resize(b + 1, 0);
            }
            counts[b] += 1;
        }
        Histogram { bin_width, counts }
    }
}

/// Dataset statistics: category counts and histograms of duration, caption length
/// and aesthetic score.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub files_scanned: usize,
    pub entries: usize,
    pub categories: BTreeMap<String, usize>,
    pub subcategories: BTreeMap<String, usize>,
    /// Source duration in seconds, 1 s bins.
    pub duration_seconds: Histogram,
    /// Caption length in characters, 10-character bins.
    pub caption_length: Histogram,
    /// Normalized aesthetic score, 0.1 bins.
    pub aesthetic_score: Histogram,
    pub mean_aesthetic_score: Option<f64>,
    pub rejections: Vec<Rejection>,
}

impl DatasetSummary {
    pub fn from_entries(entries: &[ManifestEntry], files_scanned: usize, rejections: Vec<Rejection>) -> Self {
        let mut categories = BTreeMap::new();
        let mut subcategories = BTreeMap::new();
        for e in entries {
            *categories.entry(e.category.clone()).or_insert(0) += 1;
            let key = format!("{}/{}", e.category, e.subcategory);
            *subcategories.entry(key).or_insert(0) += 1;
        }
        let durations: Vec<f64> = entries.iter().map(|e| e.duration_seconds).collect();
        let captions: Vec<f64> = entries.iter().map(|e| e.caption.chars().count() as f64).collect();
        let scores: Vec<f64> = entries.iter().map(|e| e.aesthetic_score.min(0.999_999)).collect();
        DatasetSummary {
            files_scanned,
            entries: entries.len(),
            categories,
            subcategories,
            duration_seconds: Histogram::of(&durations, 1.0, 0),
            caption_length: Histogram::of(&captions, 10.0, 0),
            aesthetic_score: Histogram::of(&scores, 0.1, 10),
            mean_aesthetic_score: (!entries.is_empty())
                .then(|| entries.iter().map(|e| e.aesthetic_score).sum::<f64>() / entries.len() as f64),
            rejections,
        }
    }

    /// One warning per rejected file.
    pub fn warnings(&self) -> usize {
        self.rejections.len()
    }
}

/// Per-file seed derived from the run seed and the relative path, so results do
/// not depend on processing order.
pub fn file_seed(seed: u64, relative: &str) -> u64 {
    let h = Sha256::digest(relative.as_bytes());
    seed ^ u64::from_le_bytes(h[..8].try_into().expect("8 bytes"))
}

/// Video files under `dir`, sorted by relative path (with `/` separators).
pub fn scan_videos(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    if !dir.is_dir() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{} is not a readable directory", dir.display()),
        )));
    }
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| Error::Io(std::io::Error::other(e)))?;
        let path = entry.path();
        let is_video = entry.file_type().is_file()
            && path
                .extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| VIDEO_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if is_video {
            let rel = path.strip_prefix(dir).expect("walk stays under root");
            let rel = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
            files.push((rel, path.to_path_buf()));
        }
    }
    files.sort();
    Ok(files)
}

/// Entry id, category and subcategory from a relative path `cat/sub/name.ext`.
pub fn describe_path(relative: &str) -> (String, String, String) {
    let parts: Vec<&str> = relative.split('/').collect();
    let (dirs, file) = parts.split_at(parts.len() - 1);
    let stem = Path::new(file[0])
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let id = dirs.iter().copied().chain([stem.as_str()]).collect::<Vec<_>>().join("__");
    let category = dirs.first().map(|s| s.to_string()).unwrap_or_default();
    let subcategory = dirs.get(1).map(|s| s.to_string()).unwrap_or_default();
    (id, category, subcategory)
}

/// Runs the pipeline on one decoded video.
pub fn process_video(
    relative: &str,
    video: &FrameSequence,
    scorer: &dyn FrameScorer,
    config: &BuildConfig,
) -> std::result::Result<ManifestEntry, Rejection> {
    let reject = |stage: &str, reason: String| Rejection {
        file: relative.to_string(),
        stage: stage.to_string(),
        reason,
    };
    let cuts = detect_scenes(video, &config.scenes);
    if cuts.scene_count() > 2 {
        return Err(reject("scenes", format!("{} scenes (cuts at {:?})", cuts.scene_count(), cuts.cuts)));
    }
    let verdict = filter_periodic(video, &config.period).map_err(|e| reject("periodic", e.to_string()))?;
    if !verdict.accepted {
        return Err(reject(
            "periodic",
            format!("periodic motion, period {:.1} frames", verdict.report.period_frames.unwrap_or(0.0)),
        ));
    }
    let score = aesthetic_score(video, scorer).map_err(|e| reject("aesthetic", e.to_string()))?;
    if score < config.min_aesthetic {
        return Err(reject(
            "aesthetic",
            format!("score {score:.4} below {}", config.min_aesthetic),
        ));
    }
    let seed = file_seed(config.seed, relative);
    let windows = extract_clip_windows(video.len(), video.fps(), &cuts, &config.policy, seed)
        .map_err(|e| reject("clips", e.to_string()))?;
    let (id, category, subcategory) = describe_path(relative);
    let entry = ManifestEntry {
        id,
        path: PathBuf::from(relative),
        category,
        subcategory,
        caption: String::new(),
        fps: video.fps(),
        duration_seconds: video.duration_seconds(),
        aesthetic_score: score,
        scene_cuts: cuts.cuts,
        start_window: windows.start,
        end_window: windows.end,
    };
    entry.validate().map_err(|e| reject("manifest", e.to_string()))?;
    Ok(entry)
}

/// Builds manifest entries for every video under `dir`. Paths in the entries are
/// relative to `dir`. Bad files are recorded as rejections, never fatal.
pub fn build_manifest(
    dir: &Path,
    scorer: &dyn FrameScorer,
    config: &BuildConfig,
) -> Result<(Vec<ManifestEntry>, DatasetSummary)> {
    config.policy.validate()?;
    let files = scan_videos(dir)?;
    let results: Vec<std::result::Result<ManifestEntry, Rejection>> = files
        .par_iter()
        .map(|(rel, path)| {
            let video = decode_video(path, None).map_err(|e| Rejection {
                file: rel.clone(),
                stage: "decode".into(),
                reason: e.to_string(),
            })?;
            process_video(rel, &video, scorer, config)
        })
        .collect();

    let mut entries = Vec::new();
    let mut rejections = Vec::new();
    for r in results {
        match r {
            Ok(e) => entries.push(e),
            Err(rej) => {
                log::warn!("skipping {} at {}: {}", rej.file, rej.stage, rej.reason);
                rejections.push(rej);
            }
        }
    }
    let mut seen = BTreeMap::new();
    for e in &entries {
        if let Some(prev) = seen.insert(e.id.clone(), e.path.clone()) {
            return Err(Error::manifest(
                "id",
                format!("`{}` and `{}` map to the same id `{}`", prev.display(), e.path.display(), e.id),
            ));
        }
    }
    let summary = DatasetSummary::from_entries(&entries, files.len(), rejections);
    Ok((entries, summary))
}
