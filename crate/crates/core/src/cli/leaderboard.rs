use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;

use super::{plots, write_file, EXIT_OK};
use crate::error::{Error, Result};
use crate::scoring::{build_leaderboard, ScoreReport};

#[derive(Debug, Clone, Args)]
pub struct LeaderboardArgs {
    /// `NAME=DIR`, where DIR is an eval output directory or its `reports` directory. Repeatable.
    #[arg(long = "model", value_name = "NAME=DIR", required = true)]
    pub models: Vec<String>,
    /// CSV output file. Prints to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a radar chart to this SVG file.
    #[arg(long)]
    pub radar: Option<PathBuf>,
}

/// Reads every `*.json` report in `dir`, sorted by file name.
pub fn read_reports(dir: &Path) -> Result<Vec<ScoreReport>> {
    let dir = if dir.join("reports").is_dir() { dir.join("reports") } else { dir.to_path_buf() };
    if !dir.is_dir() {
        return Err(Error::Config(format!("report directory `{}` does not exist", dir.display())));
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p)?;
            ScoreReport::from_json(&text)
                .map_err(|e| Error::Config(format!("`{}` is not a score report: {e}", p.display())))
        })
        .collect()
}

pub(crate) fn run(args: LeaderboardArgs) -> Result<i32> {
    let mut groups = BTreeMap::new();
    for spec in &args.models {
        let (name, dir) = spec
            .split_once('=')
            .filter(|(n, d)| !n.is_empty() && !d.is_empty())
            .ok_or_else(|| Error::Config(format!("--model expects NAME=DIR, got `{spec}`")))?;
        if groups.insert(name.to_string(), read_reports(Path::new(dir))?).is_some() {
            return Err(Error::Config(format!("model `{name}` given twice")));
        }
    }
    let board = build_leaderboard(&groups)?;
    let csv = board.to_csv()?;
    match &args.out {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(path) = &args.radar {
        write_file(path, &plots::radar_chart(&board))?;
    }
    Ok(EXIT_OK)
}
