//! `vcbench` command line.

mod build;
mod eval;
mod human_align;
mod leaderboard;
pub mod plots;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::features::{BackendNames, BackendRegistry};

pub use eval::{discover_generated, EvalSummary};
pub use human_align::{align, format_table, parse_ratings, RatingRow};
pub use leaderboard::read_reports;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FATAL: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "vcbench", version, about = "Evaluate video connecting models and build benchmark manifests")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score generated videos against a manifest.
    Eval(eval::EvalArgs),
    /// Build a manifest from a directory of raw videos.
    Build(build::BuildArgs),
    /// Merge evaluation runs of several models into one table.
    Leaderboard(leaderboard::LeaderboardArgs),
    /// Compare objective scores with human ratings.
    HumanAlign(human_align::HumanAlignArgs),
    /// Print version and registered backends.
    Version,
}

/// Backend selection shared by commands that run models.
#[derive(Debug, Clone, Args)]
pub struct BackendArgs {
    /// Embedder for subject consistency.
    #[arg(long, default_value = crate::features::stub::HISTOGRAM)]
    pub subject_backend: String,
    /// Embedder for background consistency.
    #[arg(long, default_value = crate::features::stub::GRID)]
    pub background_backend: String,
    /// Frame scorer on a 0-10 scale.
    #[arg(long, default_value = crate::features::stub::AESTHETIC)]
    pub aesthetic_backend: String,
    /// Frame scorer on a 0-100 scale.
    #[arg(long, default_value = crate::features::stub::IMAGING)]
    pub imaging_backend: String,
    /// Perceptual feature extractor.
    #[arg(long, default_value = crate::features::stub::PERCEPTUAL)]
    pub perceptual_backend: String,
}

impl BackendArgs {
    pub fn names(&self) -> BackendNames {
        BackendNames {
            subject: self.subject_backend.clone(),
            background: self.background_backend.clone(),
            aesthetic: self.aesthetic_backend.clone(),
            imaging: self.imaging_backend.clone(),
            perceptual: self.perceptual_backend.clone(),
        }
    }
}

/// Parses `args` (including the program name) and runs the command. Returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_registry(args, &BackendRegistry::default())
}

pub fn run_with_registry<I, T>(args: I, registry: &BackendRegistry) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_FATAL } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Eval(a) => eval::run(a, registry),
        Command::Build(a) => build::run(a, registry),
        Command::Leaderboard(a) => leaderboard::run(a),
        Command::HumanAlign(a) => human_align::run(a),
        Command::Version => {
            println!("vcbench {}", env!("CARGO_PKG_VERSION"));
            println!("{}", registry.listing());
            Ok(EXIT_OK)
        }
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FATAL
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

fn require_dir(path: &Path, what: &str) -> Result<PathBuf> {
    if path.is_dir() {
        Ok(path.to_path_buf())
    } else {
        Err(Error::Config(format!("{what} `{}` is not a directory", path.display())))
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
