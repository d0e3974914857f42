//! Per-model means and CSV export.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::report::{mean_report, ScoreReport};
use crate::scoring::{Metric, MetricVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub model: String,
    pub reports: usize,
    pub partial_reports: usize,
    /// Mean raw metrics, as printed in the leaderboard.
    pub metrics: MetricVector<Option<f64>>,
    pub metrics_normalized: MetricVector<Option<f64>>,
    #[serde(rename = "VQS")]
    pub vqs: Option<f64>,
    #[serde(rename = "SECS")]
    pub secs: Option<f64>,
    #[serde(rename = "TSS")]
    pub tss: Option<f64>,
    #[serde(rename = "Score")]
    pub score: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub config_digest: String,
    pub rows: Vec<LeaderboardRow>,
}

/// Averages each model's reports and orders rows by total score, best first
/// (missing totals last, ties by model name).
pub fn build_leaderboard(groups: &BTreeMap<String, Vec<ScoreReport>>) -> Result<Leaderboard> {
    if groups.is_empty() {
        return Err(Error::Config("leaderboard needs at least one model".into()));
    }
    let mut digest: Option<(&str, &str)> = None;
    let mut rows = Vec::with_capacity(groups.len());
    for (model, reports) in groups {
        if reports.is_empty() {
            return Err(Error::Config(format!("model `{model}` has no reports")));
        }
        for r in reports {
            match digest {
                None => digest = Some((&r.config_digest, &r.item_id)),
                Some((d, id)) if d != r.config_digest => {
                    return Err(Error::Config(format!(
                        "report `{}` of `{model}` used a different configuration than `{id}`",
                        r.item_id
                    )))
                }
                _ => {}
            }
        }
        let mean = mean_report(model, reports)?;
        rows.push(LeaderboardRow {
            model: model.clone(),
            reports: reports.len(),
            partial_reports: reports.iter().filter(|r| r.partial).count(),
            metrics: mean.metrics,
            metrics_normalized: mean.metrics_normalized,
            vqs: mean.vqs,
            secs: mean.secs,
            tss: mean.tss,
            score: mean.score,
        });
    }
    rows.sort_by(|a, b| {
        let key = |r: &LeaderboardRow| r.score.unwrap_or(f64::NEG_INFINITY);
        key(b).total_cmp(&key(a)).then_with(|| a.model.cmp(&b.model))
    });
    Ok(Leaderboard {
        config_digest: digest.map(|(d, _)| d.to_string()).unwrap_or_default(),
        rows,
    })
}

impl Leaderboard {
    pub fn header() -> Vec<&'static str> {
        let mut h = vec!["Model"];
        h.extend(Metric::ALL.iter().map(|m| m.label()));
        h.push("Total Score");
        h
    }

    /// Comma-separated table, values to four decimals, empty cells for missing values.
    pub fn to_csv(&self) -> Result<String> {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(Self::header()).map_err(csv_err)?;
        for row in &self.rows {
            let mut rec = vec![row.model.clone()];
            rec.extend(Metric::ALL.iter().map(|&m| fmt(row.metrics.get(m))));
            rec.push(fmt(row.score));
            w.write_record(&rec).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::BackendNames;

    fn report(id: &str, raw: [f64; 9]) -> ScoreReport {
        let m = MetricVector::from_array(raw).map(|_, v| Some(v));
        ScoreReport::from_raw(id, m, BTreeMap::new(), &BackendNames::default(), "d")
    }

    #[test]
    fn single_report_row_equals_report() {
        let r = report("a", [0.9, 0.9, 0.1, 0.5, 0.6, 0.8, 0.05, 0.02, 0.8]);
        let lb = build_leaderboard(&BTreeMap::from([("m".to_string(), vec![r.clone()])])).unwrap();
        assert_eq!(lb.rows.len(), 1);
        assert_eq!(lb.rows[0].score, r.score);
        assert_eq!(lb.rows[0].metrics, r.metrics);
    }

    #[test]
    fn rows_sorted_by_total() {
        let good = report("a", [1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0]);
        let bad = report("b", [0.5; 9]);
        let groups = BTreeMap::from([("aaa".to_string(), vec![bad]), ("zzz".to_string(), vec![good])]);
        let lb = build_leaderboard(&groups).unwrap();
        assert_eq!(lb.rows[0].model, "zzz");
        assert_eq!(lb.rows[1].model, "aaa");
    }

    #[test]
    fn means_over_three_reports() {
        let rs = vec![
            report("a", [0.9, 0.8, 0.1, 0.5, 0.6, 0.7, 0.1, 0.05, 0.9]),
            report("b", [0.6, 0.7, 0.2, 0.4, 0.5, 0.9, 0.2, 0.15, 0.7]),
            report("c", [0.3, 0.9, 0.0, 0.6, 0.7, 0.8, 0.0, 0.10, 0.8]),
        ];
        let lb = build_leaderboard(&BTreeMap::from([("m".to_string(), rs.clone())])).unwrap();
        let row = &lb.rows[0];
        assert!((row.metrics.q_s.unwrap() - 0.6).abs() < 1e-12);
        assert!((row.metrics.t_cd.unwrap() - 0.1).abs() < 1e-12);
        let want = rs.iter().map(|r| r.score.unwrap()).sum::<f64>() / 3.0;
        assert!((row.score.unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn refuses_mixed_digests_and_empty_groups() {
        let a = report("a", [0.5; 9]);
        let mut b = report("b", [0.5; 9]);
        b.config_digest = "other".into();
        let groups = BTreeMap::from([("m".to_string(), vec![a.clone()]), ("n".to_string(), vec![b])]);
        assert!(matches!(build_leaderboard(&groups), Err(Error::Config(_))));
        let empty = BTreeMap::from([("m".to_string(), vec![])]);
        assert!(build_leaderboard(&empty).is_err());
    }

    #[test]
    fn csv_header_and_cells() {
        let r = report("a", [0.921, 0.944, 0.045, 0.577, 0.720, 0.933, 0.042, 0.022, 0.839]);
        let lb = build_leaderboard(&BTreeMap::from([("Wan".to_string(), vec![r])])).unwrap();
        let csv = lb.to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "Model,Subject Consistency,Background Consistency,Flickering Severity (↓),Aesthetic Score,\
             Imaging Quality,Pixel Consistency,Optical Flow Error (↓),Connecting Distance (↓),\
             Local Perceptual Consistency,Total Score"
        );
        assert_eq!(lines.next().unwrap(), "Wan,0.9210,0.9440,0.0450,0.5770,0.7200,0.9330,0.0420,0.0220,0.8390,0.8925");
    }
}
