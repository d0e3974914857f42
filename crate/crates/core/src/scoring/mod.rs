//! Metric aggregation into dimension scores, per-item reports and leaderboards.

pub mod leaderboard;
pub mod report;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use leaderboard::{build_leaderboard, Leaderboard, LeaderboardRow};
pub use report::{evaluate_item, evaluate_multiclip, EvalConfig, ScoreReport, MEAN_ROW_ID};

/// The nine raw metrics, in leaderboard column order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "Q_S")]
    SubjectConsistency,
    #[serde(rename = "Q_B")]
    BackgroundConsistency,
    #[serde(rename = "Q_F")]
    FlickeringSeverity,
    #[serde(rename = "Q_A")]
    AestheticScore,
    #[serde(rename = "Q_I")]
    ImagingQuality,
    #[serde(rename = "C_P")]
    PixelConsistency,
    #[serde(rename = "C_OF")]
    OpticalFlowError,
    #[serde(rename = "T_CD")]
    ConnectingDistance,
    #[serde(rename = "T_LP")]
    LocalPerceptualConsistency,
}

impl Metric {
    pub const ALL: [Metric; 9] = [
        Metric::SubjectConsistency,
        Metric::BackgroundConsistency,
        Metric::FlickeringSeverity,
        Metric::AestheticScore,
        Metric::ImagingQuality,
        Metric::PixelConsistency,
        Metric::OpticalFlowError,
        Metric::ConnectingDistance,
        Metric::LocalPerceptualConsistency,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Metric::SubjectConsistency => "Q_S",
            Metric::BackgroundConsistency => "Q_B",
            Metric::FlickeringSeverity => "Q_F",
            Metric::AestheticScore => "Q_A",
            Metric::ImagingQuality => "Q_I",
            Metric::PixelConsistency => "C_P",
            Metric::OpticalFlowError => "C_OF",
            Metric::ConnectingDistance => "T_CD",
            Metric::LocalPerceptualConsistency => "T_LP",
        }
    }

    /// Column title in leaderboard exports.
    pub fn label(self) -> &'static str {
        match self {
            Metric::SubjectConsistency => "Subject Consistency",
            Metric::BackgroundConsistency => "Background Consistency",
            Metric::FlickeringSeverity => "Flickering Severity (↓)",
            Metric::AestheticScore => "Aesthetic Score",
            Metric::ImagingQuality => "Imaging Quality",
            Metric::PixelConsistency => "Pixel Consistency",
            Metric::OpticalFlowError => "Optical Flow Error (↓)",
            Metric::ConnectingDistance => "Connecting Distance (↓)",
            Metric::LocalPerceptualConsistency => "Local Perceptual Consistency",
        }
    }

    /// Lower raw values are better.
    pub fn is_negative(self) -> bool {
        matches!(
            self,
            Metric::FlickeringSeverity | Metric::OpticalFlowError | Metric::ConnectingDistance
        )
    }

    pub fn from_key(key: &str) -> Option<Metric> {
        Metric::ALL.into_iter().find(|m| m.key() == key)
    }
}

/// One value per metric. `T = Option<f64>` is used where a metric may have failed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricVector<T = f64> {
    #[serde(rename = "Q_S")]
    pub q_s: T,
    #[serde(rename = "Q_B")]
    pub q_b: T,
    #[serde(rename = "Q_F")]
    pub q_f: T,
    #[serde(rename = "Q_A")]
    pub q_a: T,
    #[serde(rename = "Q_I")]
    pub q_i: T,
    #[serde(rename = "C_P")]
    pub c_p: T,
    #[serde(rename = "C_OF")]
    pub c_of: T,
    #[serde(rename = "T_CD")]
    pub t_cd: T,
    #[serde(rename = "T_LP")]
    pub t_lp: T,
}

impl<T: Copy> MetricVector<T> {
    pub fn get(&self, m: Metric) -> T {
        match m {
            Metric::SubjectConsistency => self.q_s,
            Metric::BackgroundConsistency => self.q_b,
            Metric::FlickeringSeverity => self.q_f,
            Metric::AestheticScore => self.q_a,
            Metric::ImagingQuality => self.q_i,
            Metric::PixelConsistency => self.c_p,
            Metric::OpticalFlowError => self.c_of,
            Metric::ConnectingDistance => self.t_cd,
            Metric::LocalPerceptualConsistency => self.t_lp,
        }
    }

    pub fn get_mut(&mut self, m: Metric) -> &mut T {
        match m {
            Metric::SubjectConsistency => &mut self.q_s,
            Metric::BackgroundConsistency => &mut self.q_b,
            Metric::FlickeringSeverity => &mut self.q_f,
            Metric::AestheticScore => &mut self.q_a,
            Metric::ImagingQuality => &mut self.q_i,
            Metric::PixelConsistency => &mut self.c_p,
            Metric::OpticalFlowError => &mut self.c_of,
            Metric::ConnectingDistance => &mut self.t_cd,
            Metric::LocalPerceptualConsistency => &mut self.t_lp,
        }
    }

    pub fn from_fn(mut f: impl FnMut(Metric) -> T) -> Self {
        MetricVector {
            q_s: f(Metric::SubjectConsistency),
            q_b: f(Metric::BackgroundConsistency),
            q_f: f(Metric::FlickeringSeverity),
            q_a: f(Metric::AestheticScore),
            q_i: f(Metric::ImagingQuality),
            c_p: f(Metric::PixelConsistency),
            c_of: f(Metric::OpticalFlowError),
            t_cd: f(Metric::ConnectingDistance),
            t_lp: f(Metric::LocalPerceptualConsistency),
        }
    }

    pub fn map<U: Copy>(&self, mut f: impl FnMut(Metric, T) -> U) -> MetricVector<U> {
        MetricVector::from_fn(|m| f(m, self.get(m)))
    }
}

impl MetricVector<f64> {
    /// Values in column order.
    pub fn to_array(&self) -> [f64; 9] {
        Metric::ALL.map(|m| self.get(m))
    }

    pub fn from_array(values: [f64; 9]) -> Self {
        MetricVector::from_fn(|m| values[m as usize])
    }
}

impl MetricVector<Option<f64>> {
    /// `Some` only when every metric is present.
    pub fn complete(&self) -> Option<MetricVector<f64>> {
        let mut out = MetricVector::default();
        for m in Metric::ALL {
            *out.get_mut(m) = self.get(m)?;
        }
        Some(out)
    }
}

/// Inverts the negative metrics (`1 - v`) and clamps everything to `[0, 1]`.
pub fn normalize_metrics(raw: &MetricVector) -> Result<MetricVector> {
    let mut out = MetricVector::default();
    for m in Metric::ALL {
        *out.get_mut(m) = normalize_one(m, raw.get(m))?;
    }
    Ok(out)
}

pub fn normalize_one(m: Metric, v: f64) -> Result<f64> {
    if !v.is_finite() {
        return Err(Error::NonFinite(m.key().into()));
    }
    let oriented = if m.is_negative() { 1.0 - v } else { v };
    Ok(oriented.clamp(0.0, 1.0))
}

/// VQS from normalized metrics (flicker already inverted).
pub fn video_quality_score(n: &MetricVector) -> f64 {
    (n.q_s + n.q_b + n.q_f + n.q_a + n.q_i) / 5.0
}

/// SECS from normalized metrics (flow error already inverted).
pub fn start_end_consistency_score(n: &MetricVector) -> f64 {
    (n.c_p + n.c_of) / 2.0
}

/// TSS from normalized metrics (connecting distance already inverted).
pub fn transition_smoothness_score(n: &MetricVector) -> f64 {
    (n.t_cd + n.t_lp) / 2.0
}

pub fn total_score(vqs: f64, secs: f64, tss: f64) -> f64 {
    (vqs + secs + tss) / 3.0
}

/// The three dimension scores and the total.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionScores {
    pub vqs: f64,
    pub secs: f64,
    pub tss: f64,
    pub score: f64,
}

/// Raw metrics through normalization, the dimension means and the total.
pub fn aggregate(raw: &MetricVector) -> Result<DimensionScores> {
    let n = normalize_metrics(raw)?;
    let (vqs, secs, tss) = (
        video_quality_score(&n),
        start_end_consistency_score(&n),
        transition_smoothness_score(&n),
    );
    Ok(DimensionScores {
        vqs,
        secs,
        tss,
        score: total_score(vqs, secs, tss),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(v: [f64; 9]) -> MetricVector {
        MetricVector::from_array(v)
    }

    #[test]
    fn negative_metrics_are_inverted_and_clamped() {
        let mut raw = row([0.9, 0.9, 0.045, 0.5, 0.5, -0.2, 0.04, 1.3, 0.8]);
        let n = normalize_metrics(&raw).unwrap();
        assert!((n.q_f - 0.955).abs() < 1e-12);
        assert_eq!(n.c_p, 0.0);
        assert_eq!(n.t_cd, 0.0);
        assert_eq!((n.q_s, n.q_a, n.t_lp), (0.9, 0.5, 0.8));
        raw.q_a = f64::NAN;
        assert!(matches!(normalize_metrics(&raw), Err(Error::NonFinite(_))));
    }

    #[test]
    fn dimension_scores_at_extremes() {
        let best = aggregate(&row([1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0])).unwrap();
        assert_eq!((best.vqs, best.secs, best.tss, best.score), (1.0, 1.0, 1.0, 1.0));
        let worst = aggregate(&row([0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0])).unwrap();
        assert_eq!((worst.vqs, worst.secs, worst.tss, worst.score), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn keys_round_trip() {
        for m in Metric::ALL {
            assert_eq!(Metric::from_key(m.key()), Some(m));
        }
        let v = row([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]);
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.starts_with(r#"{"Q_S":0.1,"Q_B":0.2"#), "{json}");
        assert_eq!(serde_json::from_str::<MetricVector>(&json).unwrap(), v);
    }

    proptest! {
        #[test]
        fn score_is_monotone_in_each_metric(
            base in proptest::array::uniform9(0.0f64..1.0),
            which in 0usize..9,
            bump in 0.0f64..0.5,
        ) {
            let a = row(base);
            let mut b = a;
            let m = Metric::ALL[which];
            *b.get_mut(m) += bump;
            let (sa, sb) = (aggregate(&a).unwrap().score, aggregate(&b).unwrap().score);
            if m.is_negative() {
                prop_assert!(sb <= sa + 1e-15);
            } else {
                prop_assert!(sb >= sa - 1e-15);
            }
        }
    }
}
