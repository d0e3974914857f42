use std::path::PathBuf;

use clap::Args;

use super::{plots, require_dir, to_json, write_file, EXIT_OK};
use crate::dataset::{build_manifest, BuildConfig, ClipExtractionPolicy, SceneParams};
use crate::error::Result;
use crate::features::{stub, BackendNames, BackendRegistry};
use crate::media::manifest::manifest_to_string;
use crate::pixel::PeriodParams;

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    /// Directory of raw videos, laid out as `<category>/<subcategory>/<name>.<ext>`.
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory for `manifest.json` and `summary.json`.
    #[arg(long)]
    pub out: PathBuf,
    /// Seed for clip duration draws.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Scorer used for the aesthetic filter.
    #[arg(long, default_value = stub::AESTHETIC)]
    pub aesthetic_backend: String,
    /// Minimum normalized aesthetic score.
    #[arg(long, default_value_t = BuildConfig::default().min_aesthetic)]
    pub min_aesthetic: f64,
    /// Histogram distance above which consecutive frames are a cut.
    #[arg(long, default_value_t = SceneParams::default().threshold)]
    pub scene_threshold: f64,
    /// Minimum scene length in frames.
    #[arg(long, default_value_t = SceneParams::default().min_scene_len)]
    pub min_scene_len: usize,
    /// Minimum prominence of an SSIM peak.
    #[arg(long, default_value_t = PeriodParams::default().min_prominence)]
    pub min_prominence: f64,
    /// Minimum spacing of SSIM peaks in frames.
    #[arg(long, default_value_t = PeriodParams::default().min_distance)]
    pub min_peak_distance: usize,
    /// Peaks needed before motion counts as periodic.
    #[arg(long, default_value_t = PeriodParams::default().min_peaks)]
    pub min_peaks: usize,
    /// Largest coefficient of variation of peak gaps that still counts as periodic.
    #[arg(long, default_value_t = PeriodParams::default().max_gap_cv)]
    pub max_gap_cv: f64,
    /// Length of the excerpt holding both clips, in seconds.
    #[arg(long, default_value_t = ClipExtractionPolicy::default().total_seconds)]
    pub total_seconds: f64,
    /// Shortest clip in seconds.
    #[arg(long, default_value_t = ClipExtractionPolicy::default().min_clip_seconds)]
    pub min_clip_seconds: f64,
    /// Longest clip in seconds.
    #[arg(long, default_value_t = ClipExtractionPolicy::default().max_clip_seconds)]
    pub max_clip_seconds: f64,
    /// Frames on each side of a cut that no clip may touch.
    #[arg(long, default_value_t = ClipExtractionPolicy::default().transition_margin_frames)]
    pub transition_margin: usize,
    /// Also write SVG histograms under `<out>/plots`.
    #[arg(long)]
    pub plots: bool,
}

impl BuildArgs {
    pub fn build_config(&self) -> BuildConfig {
        BuildConfig {
            scenes: SceneParams {
                threshold: self.scene_threshold,
                min_scene_len: self.min_scene_len,
            },
            period: PeriodParams {
                min_prominence: self.min_prominence,
                min_distance: self.min_peak_distance,
                min_peaks: self.min_peaks,
                max_gap_cv: self.max_gap_cv,
            },
            policy: ClipExtractionPolicy {
                total_seconds: self.total_seconds,
                min_clip_seconds: self.min_clip_seconds,
                max_clip_seconds: self.max_clip_seconds,
                transition_margin_frames: self.transition_margin,
            },
            min_aesthetic: self.min_aesthetic,
            seed: self.seed,
        }
    }
}

pub(crate) fn run(args: BuildArgs, registry: &BackendRegistry) -> Result<i32> {
    let config = args.build_config();
    config.policy.validate()?;
    let names = BackendNames {
        aesthetic: args.aesthetic_backend.clone(),
        ..BackendNames::default()
    };
    let backends = registry.build(&names)?;
    let input = require_dir(&args.input, "input directory")?;
    let (entries, summary) = build_manifest(&input, backends.aesthetic.as_ref(), &config)?;
    write_file(&args.out.join("manifest.json"), &manifest_to_string(&entries)?)?;
    write_file(&args.out.join("summary.json"), &to_json(&summary)?)?;
    if args.plots {
        for (name, svg) in plots::dataset_plots(&summary) {
            write_file(&args.out.join("plots").join(name), &svg)?;
        }
    }
    eprintln!(
        "{} entries from {} files, {} warnings",
        summary.entries,
        summary.files_scanned,
        summary.warnings()
    );
    Ok(EXIT_OK)
}
