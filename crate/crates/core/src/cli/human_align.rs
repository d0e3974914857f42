use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::PathBuf;

use clap::Args;

use super::leaderboard::read_reports;
use super::{write_file, EXIT_OK};
use crate::error::{Error, Result};
use crate::scoring::{ScoreReport, MEAN_ROW_ID};
use crate::stats::{human_alignment, AlignmentRow, RaterMatrix};

const DIMENSIONS: [&str; 3] = ["VQS", "SECS", "TSS"];

#[derive(Debug, Clone, Args)]
pub struct HumanAlignArgs {
    /// Directory of score reports (an eval output directory works too).
    #[arg(long)]
    pub reports: PathBuf,
    /// CSV with header `item_id,dimension,<rater>,...`; dimension is VQS, SECS or TSS.
    #[arg(long)]
    pub ratings: PathBuf,
    /// Lowest possible rating.
    #[arg(long, default_value_t = 0.0)]
    pub scale_min: f64,
    /// Highest possible rating.
    #[arg(long, default_value_t = 10.0)]
    pub scale_max: f64,
    /// Write the table as CSV to this file as well.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatingRow {
    pub item_id: String,
    pub dimension: String,
    pub ratings: Vec<f64>,
}

pub fn parse_ratings<R: Read>(reader: R) -> Result<Vec<RatingRow>> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let bad = |line: usize, msg: String| Error::Config(format!("ratings line {line}: {msg}"));
    let header = csv.headers().map_err(|e| Error::Config(format!("ratings header: {e}")))?.clone();
    if header.len() < 3 || &header[0] != "item_id" || &header[1] != "dimension" {
        return Err(Error::Config(
            "ratings must start with the header `item_id,dimension,<rater>,...`".into(),
        ));
    }
    let mut rows = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| bad(line, e.to_string()))?;
        let dimension = record[1].to_ascii_uppercase();
        if !DIMENSIONS.contains(&dimension.as_str()) {
            return Err(bad(line, format!("unknown dimension `{}`", &record[1])));
        }
        let ratings = record
            .iter()
            .skip(2)
            .map(|v| v.parse::<f64>().map_err(|_| bad(line, format!("`{v}` is not a number"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(RatingRow {
            item_id: record[0].to_string(),
            dimension,
            ratings,
        });
    }
    if rows.is_empty() {
        return Err(Error::Config("ratings file has no rows".into()));
    }
    Ok(rows)
}

fn objective(report: &ScoreReport, dimension: &str) -> Option<f64> {
    match dimension {
        "VQS" => report.vqs,
        "SECS" => report.secs,
        "TSS" => report.tss,
        _ => None,
    }
}

/// One row per rated dimension, in VQS, SECS, TSS order.
pub fn align(reports: &[ScoreReport], ratings: &[RatingRow], scale: (f64, f64)) -> Result<Vec<AlignmentRow>> {
    let by_id: BTreeMap<&str, &ScoreReport> = reports
        .iter()
        .filter(|r| r.item_id != MEAN_ROW_ID)
        .map(|r| (r.item_id.as_str(), r))
        .collect();
    let mut out = Vec::new();
    for dim in DIMENSIONS {
        let mut rated: BTreeMap<&str, &Vec<f64>> = BTreeMap::new();
        for row in ratings.iter().filter(|r| r.dimension == dim) {
            if rated.insert(&row.item_id, &row.ratings).is_some() {
                return Err(Error::Config(format!("`{}` is rated twice for {dim}", row.item_id)));
            }
        }
        if rated.is_empty() {
            continue;
        }
        let rated_ids: BTreeSet<&str> = rated.keys().copied().collect();
        let report_ids: BTreeSet<&str> = by_id.keys().copied().collect();
        let unreported: Vec<&str> = rated_ids.difference(&report_ids).copied().collect();
        let unrated: Vec<&str> = report_ids.difference(&rated_ids).copied().collect();
        if !unreported.is_empty() || !unrated.is_empty() {
            return Err(Error::Config(format!(
                "{dim}: item ids do not match; rated without report: [{}]; reported without rating: [{}]",
                unreported.join(", "),
                unrated.join(", ")
            )));
        }
        let mut objectives = Vec::with_capacity(rated.len());
        let mut matrix = Vec::with_capacity(rated.len());
        for (id, r) in &rated {
            let value = objective(by_id[id], dim)
                .ok_or_else(|| Error::Config(format!("report `{id}` has no {dim} value")))?;
            objectives.push(value);
            matrix.push((*r).clone());
        }
        out.push(human_alignment(dim, &objectives, &RaterMatrix::new(matrix, scale)?)?);
    }
    Ok(out)
}

const COLUMNS: [&str; 5] = [
    "Score",
    "Objective Avg.",
    "Subjective Avg.",
    "Correlation Coefficient",
    "Subjective Consistency",
];

fn cells(row: &AlignmentRow) -> [String; 5] {
    [
        row.dimension.clone(),
        format!("{:.4}", row.objective_mean),
        format!("{:.4}", row.subjective_mean),
        format!("{:.4}", row.correlation),
        format!("{:.4}", row.consistency),
    ]
}

pub fn format_table(rows: &[AlignmentRow]) -> String {
    let body: Vec<[String; 5]> = rows.iter().map(cells).collect();
    let widths: Vec<usize> = (0..5)
        .map(|c| body.iter().map(|r| r[c].len()).chain([COLUMNS[c].len()]).max().unwrap_or(0))
        .collect();
    let line = |cols: &[String]| {
        cols.iter()
            .zip(&widths)
            .map(|(s, w)| format!("{s:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut s = line(&COLUMNS.map(String::from)) + "\n";
    for r in &body {
        s += &line(r);
        s.push('\n');
    }
    s
}

fn to_csv(rows: &[AlignmentRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(COLUMNS).map_err(io)?;
    for r in rows {
        w.write_record(cells(r)).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub(crate) fn run(args: HumanAlignArgs) -> Result<i32> {
    let reports = read_reports(&args.reports)?;
    let file = std::fs::File::open(&args.ratings)
        .map_err(|e| Error::Config(format!("cannot read `{}`: {e}", args.ratings.display())))?;
    let ratings = parse_ratings(file)?;
    let rows = align(&reports, &ratings, (args.scale_min, args.scale_max))?;
    print!("{}", format_table(&rows));
    if let Some(path) = &args.out {
        write_file(path, &to_csv(&rows)?)?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let rows = parse_ratings("item_id,dimension,r1,r2\na,vqs,7,8\nb,TSS, 6 ,5\n".as_bytes()).unwrap();
        assert_eq!(rows[0].dimension, "VQS");
        assert_eq!(rows[1].ratings, vec![6.0, 5.0]);
        assert!(parse_ratings("".as_bytes()).is_err());
        assert!(parse_ratings("item_id,dimension,r1\n".as_bytes()).is_err());
        assert!(parse_ratings("item_id,dimension,r1\na,XYZ,1\n".as_bytes()).is_err());
        assert!(parse_ratings("item_id,dimension,r1\na,VQS,high\n".as_bytes()).is_err());
    }

    #[test]
    fn table_layout() {
        let row = AlignmentRow {
            dimension: "VQS".into(),
            items: 3,
            objective_mean: 0.815,
            subjective_mean: 0.807,
            correlation: 0.839,
            consistency: 0.968,
        };
        let t = format_table(&[row]);
        let lines: Vec<&str> = t.lines().collect();
        assert!(lines[0].starts_with("Score  Objective Avg."));
        assert!(lines[1].starts_with("VQS    0.8150"));
    }
}
