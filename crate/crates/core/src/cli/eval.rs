use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{plots, require_dir, to_json, write_file, BackendArgs, EXIT_OK, EXIT_PARTIAL};
use crate::alignment::ConnectingDistanceConfig;
use crate::dataset::VIDEO_EXTENSIONS;
use crate::error::{Error, Result};
use crate::features::{BackendNames, BackendRegistry, Backends};
use crate::media::{decode_video, load_manifest, ClipPair, EvaluationItem, ManifestEntry};
use crate::pixel::{FlickerConfig, FlowParams};
use crate::scoring::{build_leaderboard, evaluate_item, EvalConfig, ScoreReport};

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Manifest produced by `vcbench build`.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory of generated videos named `<item id>.<ext>`.
    #[arg(long)]
    pub generated: PathBuf,
    /// Directory the manifest paths are relative to. Defaults to the manifest's directory.
    #[arg(long)]
    pub source_root: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Model name for the leaderboard. Defaults to the generated directory name.
    #[arg(long)]
    pub model: Option<String>,
    #[command(flatten)]
    pub backends: BackendArgs,
    /// Flicker patch size in pixels.
    #[arg(long, default_value_t = FlickerConfig::default().patch_size)]
    pub flicker_patch: usize,
    /// Flicker threshold on the per-patch change.
    #[arg(long, default_value_t = FlickerConfig::default().eta)]
    pub flicker_eta: f64,
    /// Optical flow block size in pixels.
    #[arg(long, default_value_t = FlowParams::default().block_size)]
    pub flow_block: usize,
    /// Optical flow search radius in pixels.
    #[arg(long, default_value_t = FlowParams::default().window)]
    pub flow_window: usize,
    /// Aligned frame pairs sampled for the connecting distance.
    #[arg(long, default_value_t = ConnectingDistanceConfig::default().k)]
    pub cd_k: usize,
    /// Middle frames sampled for the connecting distance.
    #[arg(long, default_value_t = ConnectingDistanceConfig::default().z)]
    pub cd_z: usize,
    /// Floor on temporal distances in the connecting distance.
    #[arg(long, default_value_t = ConnectingDistanceConfig::default().min_distance)]
    pub cd_min_distance: usize,
    /// Worker threads. Defaults to the number of CPUs.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Also write SVG plots under `<out>/plots`.
    #[arg(long)]
    pub plots: bool,
}

impl EvalArgs {
    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            flicker: FlickerConfig {
                patch_size: self.flicker_patch,
                eta: self.flicker_eta,
            },
            flow: FlowParams {
                block_size: self.flow_block,
                window: self.flow_window,
            },
            connecting: ConnectingDistanceConfig {
                k: self.cd_k,
                z: self.cd_z,
                min_distance: self.cd_min_distance,
            },
        }
    }
}

/// Written to `<out>/summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub model: String,
    pub manifest_entries: usize,
    pub evaluated: usize,
    pub missing: Vec<String>,
    pub failed: BTreeMap<String, String>,
    pub partial: Vec<String>,
    pub config: EvalConfig,
    pub backends: BackendNames,
    pub config_digest: String,
}

/// Maps item ids (file stems) to generated files. Two files with one stem is an error.
pub fn discover_generated(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut found: BTreeMap<String, PathBuf> = BTreeMap::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if !path.is_file() || !ext.is_some_and(|e| VIDEO_EXTENSIONS.contains(&e.as_str())) {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()).map(str::to_string) else {
            continue;
        };
        if let Some(prev) = found.get(&stem) {
            let (a, b) = if prev < &path { (prev, &path) } else { (&path, prev) };
            return Err(Error::Config(format!(
                "item `{stem}` is ambiguous: both `{}` and `{}` exist",
                a.display(),
                b.display()
            )));
        }
        found.insert(stem, path);
    }
    Ok(found)
}

pub fn report_file_name(id: &str) -> String {
    format!("{}.json", id.replace(['/', '\\'], "__"))
}

fn load_item(entry: &ManifestEntry, source_root: &Path, generated: &Path) -> Result<EvaluationItem> {
    let source_path = source_root.join(&entry.path);
    let source = decode_video(&source_path, Some(entry.fps))?;
    if entry.end_window.last() >= source.len() {
        return Err(Error::manifest(
            "end_window",
            format!(
                "`{}` ends at frame {} but `{}` has {} frames",
                entry.id,
                entry.end_window.last(),
                source_path.display(),
                source.len()
            ),
        ));
    }
    let clips = ClipPair::new(source.slice(entry.start_window.range())?, source.slice(entry.end_window.range())?)?;
    let generated = decode_video(generated, Some(entry.fps))?;
    let mut item = EvaluationItem::new(entry.id.clone(), clips, generated)?;
    item.prompt = (!entry.caption.is_empty()).then(|| entry.caption.clone());
    item.category = entry.category.clone();
    item.subcategory = entry.subcategory.clone();
    Ok(item)
}

fn evaluate_entry(
    entry: &ManifestEntry,
    source_root: &Path,
    generated: &Path,
    backends: &Backends,
    config: &EvalConfig,
) -> Result<ScoreReport> {
    let item = load_item(entry, source_root, generated)?;
    evaluate_item(&item, backends, config)
}

pub(crate) fn run(args: EvalArgs, registry: &BackendRegistry) -> Result<i32> {
    let config = args.eval_config();
    config.validate()?;
    let names = args.backends.names();
    registry.validate(&names)?;
    if args.workers == Some(0) {
        return Err(Error::Config("--workers must be >= 1".into()));
    }
    if !args.manifest.is_file() {
        return Err(Error::Config(format!("manifest `{}` does not exist", args.manifest.display())));
    }
    let generated_dir = require_dir(&args.generated, "generated directory")?;
    let source_root = match &args.source_root {
        Some(r) => require_dir(r, "source root")?,
        None => args.manifest.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let model = match &args.model {
        Some(m) => m.clone(),
        None => generated_dir
            .canonicalize()?
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "model".into()),
    };
    let entries = load_manifest(&args.manifest)?;
    let files = discover_generated(&generated_dir)?;
    let digest = config.digest(&names);

    let mut missing = Vec::new();
    let mut jobs = Vec::new();
    for entry in &entries {
        match files.get(&entry.id) {
            Some(path) => jobs.push((entry, path)),
            None => {
                log::warn!("no generated video for `{}`", entry.id);
                missing.push(entry.id.clone());
            }
        }
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.workers {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let shared = registry.build(&names)?;
    let outcomes: Vec<Result<ScoreReport>> = pool.install(|| {
        if shared.reentrant() {
            jobs.par_iter()
                .map(|(e, p)| evaluate_entry(e, &source_root, p, &shared, &config))
                .collect()
        } else {
            // each worker owns its own instances
            jobs.par_iter()
                .map_init(
                    || registry.build(&names),
                    |backends, (e, p)| match backends {
                        Ok(b) => evaluate_entry(e, &source_root, p, b, &config),
                        Err(err) => Err(Error::Backend {
                            backend: "registry".into(),
                            message: err.to_string(),
                        }),
                    },
                )
                .collect()
        }
    });

    let reports_dir = args.out.join("reports");
    std::fs::create_dir_all(&reports_dir)?;
    let mut reports = Vec::new();
    let mut failed = BTreeMap::new();
    for ((entry, _), outcome) in jobs.iter().zip(outcomes) {
        match outcome {
            Ok(r) => {
                write_file(&reports_dir.join(report_file_name(&r.item_id)), &r.to_json()?)?;
                reports.push(r);
            }
            Err(e) => {
                log::warn!("`{}` failed: {e}", entry.id);
                failed.insert(entry.id.clone(), e.to_string());
            }
        }
    }
    let partial: Vec<String> = reports.iter().filter(|r| r.partial).map(|r| r.item_id.clone()).collect();
    let summary = EvalSummary {
        model: model.clone(),
        manifest_entries: entries.len(),
        evaluated: reports.len(),
        missing,
        failed,
        partial,
        config,
        backends: names,
        config_digest: digest,
    };
    write_file(&args.out.join("summary.json"), &to_json(&summary)?)?;

    if reports.is_empty() {
        return Err(Error::Config(format!(
            "no item could be evaluated ({} missing, {} failed)",
            summary.missing.len(),
            summary.failed.len()
        )));
    }
    let groups = BTreeMap::from([(model, reports)]);
    let board = build_leaderboard(&groups)?;
    write_file(&args.out.join("leaderboard.csv"), &board.to_csv()?)?;
    if args.plots {
        write_file(&args.out.join("plots").join("radar.svg"), &plots::radar_chart(&board))?;
    }

    let clean = summary.missing.is_empty() && summary.failed.is_empty() && summary.partial.is_empty();
    eprintln!(
        "evaluated {} of {} items ({} missing, {} failed, {} partial)",
        summary.evaluated,
        summary.manifest_entries,
        summary.missing.len(),
        summary.failed.len(),
        summary.partial.len()
    );
    Ok(if clean { EXIT_OK } else { EXIT_PARTIAL })
}
