//! Per-item evaluation and the report document.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::alignment::{connecting_distance, ConnectingDistanceConfig};
use crate::error::{Error, Result};
use crate::features::{self, BackendNames, Backends};
use crate::media::{ClipPair, EvaluationItem, FrameSequence, FrameWindow};
use crate::pixel::{flicker_severity, optical_flow_error, pixel_consistency, FlickerConfig, FlowParams};
use crate::scoring::{
    normalize_one, start_end_consistency_score, total_score, transition_smoothness_score, video_quality_score, Metric,
    MetricVector,
};

/// Item id of the averaged row appended by [`evaluate_multiclip`].
pub const MEAN_ROW_ID: &str = "mean";

/// Every parameter that can change a metric value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub flicker: FlickerConfig,
    pub flow: FlowParams,
    pub connecting: ConnectingDistanceConfig,
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        self.flicker.validate()?;
        self.connecting.validate()?;
        if self.flow.block_size == 0 {
            return Err(Error::Config("flow block size must be >= 1".into()));
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON of the config and the backend names.
    pub fn digest(&self, backends: &BackendNames) -> String {
        #[derive(Serialize)]
        struct Canonical<'a> {
            config: &'a EvalConfig,
            backends: &'a BackendNames,
        }
        let json = serde_json::to_vec(&Canonical { config: self, backends }).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub item_id: String,
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
    pub backend_names: BTreeMap<String, String>,
    pub config_digest: String,
    /// Metric key to error message, for every metric that failed.
    #[serde(default)]
    pub errors: BTreeMap<String, String>,
    pub partial: bool,
}

impl ScoreReport {
    /// Builds a report from raw metric values; dimensions with a missing metric stay empty.
    pub fn from_raw(
        item_id: impl Into<String>,
        metrics: MetricVector<Option<f64>>,
        mut errors: BTreeMap<String, String>,
        backend_names: &BackendNames,
        config_digest: impl Into<String>,
    ) -> Self {
        let metrics_normalized = metrics.map(|m, v| {
            v.and_then(|v| match normalize_one(m, v) {
                Ok(n) => Some(n),
                Err(e) => {
                    errors.insert(m.key().into(), e.to_string());
                    None
                }
            })
        });
        let metrics = metrics.map(|m, v| if errors.contains_key(m.key()) { None } else { v });
        let n = &metrics_normalized;
        let vqs = (|| {
            let v = MetricVector { q_s: n.q_s?, q_b: n.q_b?, q_f: n.q_f?, q_a: n.q_a?, q_i: n.q_i?, ..Default::default() };
            Some(video_quality_score(&v))
        })();
        let secs = (|| {
            let v = MetricVector { c_p: n.c_p?, c_of: n.c_of?, ..Default::default() };
            Some(start_end_consistency_score(&v))
        })();
        let tss = (|| {
            let v = MetricVector { t_cd: n.t_cd?, t_lp: n.t_lp?, ..Default::default() };
            Some(transition_smoothness_score(&v))
        })();
        let score = (|| Some(total_score(vqs?, secs?, tss?)))();
        ScoreReport {
            item_id: item_id.into(),
            metrics,
            metrics_normalized,
            vqs,
            secs,
            tss,
            score,
            backend_names: backend_names.to_map(),
            config_digest: config_digest.into(),
            partial: !errors.is_empty(),
            errors,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn compute(item: &EvaluationItem, backends: &Backends, config: &EvalConfig, m: Metric) -> Result<f64> {
    let video = &item.generated;
    let v = match m {
        Metric::SubjectConsistency => features::subject_consistency(video, backends.subject.as_ref())?,
        Metric::BackgroundConsistency => features::background_consistency(video, backends.background.as_ref())?,
        Metric::FlickeringSeverity => flicker_severity(video, &config.flicker)?,
        Metric::AestheticScore => features::aesthetic_score(video, backends.aesthetic.as_ref())?,
        Metric::ImagingQuality => features::imaging_quality(video, backends.imaging.as_ref())?,
        Metric::PixelConsistency => pixel_consistency(item)?,
        Metric::OpticalFlowError => optical_flow_error(item, config.flow)?,
        Metric::ConnectingDistance => connecting_distance(item, &config.connecting)?,
        Metric::LocalPerceptualConsistency => {
            features::local_perceptual_consistency(video, backends.perceptual.as_ref())?
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(m.key().into()))
    }
}

/// Computes all nine metrics for one item. A failing metric is recorded in
/// `errors` and the report is marked partial; only an invalid config is an `Err`.
pub fn evaluate_item(item: &EvaluationItem, backends: &Backends, config: &EvalConfig) -> Result<ScoreReport> {
    config.validate()?;
    let names = backends.names();
    let mut errors = BTreeMap::new();
    let metrics = MetricVector::from_fn(|m| match compute(item, backends, config, m) {
        Ok(v) => Some(v),
        Err(e) => {
            log::warn!("{}: {} failed: {e}", item.id, m.key());
            errors.insert(m.key().to_string(), e.to_string());
            None
        }
    });
    Ok(ScoreReport::from_raw(&item.id, metrics, errors, &names, config.digest(&names)))
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let present: Vec<f64> = values.flatten().collect();
    (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
}

/// Field-wise mean over reports; each field averages the reports where it is present.
pub fn mean_report(item_id: &str, reports: &[ScoreReport]) -> Result<ScoreReport> {
    let first = reports
        .first()
        .ok_or_else(|| Error::Config("cannot average an empty set of reports".into()))?;
    if let Some(r) = reports.iter().find(|r| r.config_digest != first.config_digest) {
        return Err(Error::Config(format!(
            "report `{}` was produced with a different configuration than `{}`",
            r.item_id, first.item_id
        )));
    }
    let metrics = MetricVector::from_fn(|m| mean_of(reports.iter().map(|r| r.metrics.get(m))));
    let metrics_normalized = MetricVector::from_fn(|m| mean_of(reports.iter().map(|r| r.metrics_normalized.get(m))));
    let mut errors = BTreeMap::new();
    for r in reports.iter().filter(|r| r.partial) {
        for (k, v) in &r.errors {
            errors.insert(format!("{}/{k}", r.item_id), v.clone());
        }
    }
    Ok(ScoreReport {
        item_id: item_id.to_string(),
        metrics,
        metrics_normalized,
        vqs: mean_of(reports.iter().map(|r| r.vqs)),
        secs: mean_of(reports.iter().map(|r| r.secs)),
        tss: mean_of(reports.iter().map(|r| r.tss)),
        score: mean_of(reports.iter().map(|r| r.score)),
        backend_names: first.backend_names.clone(),
        config_digest: first.config_digest.clone(),
        partial: !errors.is_empty(),
        errors,
    })
}

/// Evaluates each junction of a chain of clips joined by one generated video.
///
/// `clip_windows[i]` is where clip `i` sits in `generated` (same length as the
/// clip). Junction `j` is the item with clips `j` and `j + 1` and the generated
/// frames spanning both windows. Returns one report per junction, ids
/// `<id>/<j>`, followed by their mean with id [`MEAN_ROW_ID`].
pub fn evaluate_multiclip(
    id: &str,
    clips: &[FrameSequence],
    generated: &FrameSequence,
    clip_windows: &[FrameWindow],
    backends: &Backends,
    config: &EvalConfig,
) -> Result<Vec<ScoreReport>> {
    if clips.len() < 2 {
        return Err(Error::Config(format!("multi-clip evaluation needs >= 2 clips, got {}", clips.len())));
    }
    if clip_windows.len() != clips.len() {
        return Err(Error::Config(format!(
            "{} clip windows given for {} clips",
            clip_windows.len(),
            clips.len()
        )));
    }
    for (i, (clip, w)) in clips.iter().zip(clip_windows).enumerate() {
        if w.last() < w.first() || w.len() != clip.len() {
            return Err(Error::Config(format!(
                "window {i} {:?} does not match clip length {}",
                (w.first(), w.last()),
                clip.len()
            )));
        }
        if w.last() >= generated.len() {
            return Err(Error::Config(format!(
                "window {i} ends at frame {} but the generated video has {} frames",
                w.last(),
                generated.len()
            )));
        }
    }
    for (i, pair) in clip_windows.windows(2).enumerate() {
        if pair[1].first() <= pair[0].last() {
            return Err(Error::Config(format!("clip windows {i} and {} overlap or are out of order", i + 1)));
        }
    }

    let mut reports = Vec::with_capacity(clips.len());
    for j in 0..clips.len() - 1 {
        let span = generated.slice(clip_windows[j].first()..clip_windows[j + 1].last() + 1)?;
        let item = EvaluationItem::new(
            format!("{id}/{j}"),
            ClipPair::new(clips[j].clone(), clips[j + 1].clone())?,
            span,
        )?;
        reports.push(evaluate_item(&item, backends, config)?);
    }
    let mean = mean_report(MEAN_ROW_ID, &reports)?;
    reports.push(mean);
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn stub() -> Backends {
        Backends::stubs()
    }

    #[test]
    fn self_connected_item_is_consistent() {
        let item = synth::self_connected_item("s", 64, 64, 6, 8, 6, 2);
        let r = evaluate_item(&item, &stub(), &EvalConfig::default()).unwrap();
        assert!(!r.partial, "{:?}", r.errors);
        assert_eq!(r.metrics.c_p, Some(1.0));
        assert_eq!(r.metrics.c_of, Some(0.0));
        assert_eq!(r.metrics.t_cd, Some(0.0));
        let s = r.score.unwrap();
        assert_eq!(s, (r.vqs.unwrap() + r.secs.unwrap() + r.tss.unwrap()) / 3.0);
    }

    #[test]
    fn missing_middle_gives_partial_report() {
        let item = synth::self_connected_item("s", 64, 64, 6, 0, 6, 2);
        let r = evaluate_item(&item, &stub(), &EvalConfig::default()).unwrap();
        assert!(r.partial);
        assert!(r.errors.contains_key("T_CD"));
        assert_eq!(r.metrics.t_cd, None);
        assert!(r.tss.is_none() && r.score.is_none());
        assert!(r.vqs.is_some() && r.secs.is_some());
    }

    #[test]
    fn reports_are_byte_identical() {
        let item = synth::noisy_middle_item("n", 32, 32, 3, 5, 3, 4);
        let a = evaluate_item(&item, &stub(), &EvalConfig::default()).unwrap().to_json().unwrap();
        let b = evaluate_item(&item, &stub(), &EvalConfig::default()).unwrap().to_json().unwrap();
        assert_eq!(a, b);
        assert_eq!(ScoreReport::from_json(&a).unwrap().to_json().unwrap(), a);
    }

    #[test]
    fn digest_tracks_config_and_backends() {
        let names = BackendNames::default();
        let base = EvalConfig::default();
        let mut other = base.clone();
        other.connecting.k = 4;
        assert_eq!(base.digest(&names), base.digest(&names));
        assert_ne!(base.digest(&names), other.digest(&names));
        let renamed = BackendNames { imaging: "other".into(), ..names.clone() };
        assert_ne!(base.digest(&names), base.digest(&renamed));
    }

    #[test]
    fn invalid_config_is_an_error() {
        let item = synth::self_connected_item("s", 32, 32, 3, 3, 3, 2);
        let mut cfg = EvalConfig::default();
        cfg.flicker.eta = 2.0;
        assert!(matches!(evaluate_item(&item, &stub(), &cfg), Err(Error::Config(_))));
    }

    fn chain(n_clips: usize, clip_len: usize, gap: usize) -> (Vec<FrameSequence>, FrameSequence, Vec<FrameWindow>) {
        let total = n_clips * clip_len + (n_clips - 1) * gap;
        let video = synth::pan(32, 32, total, 1, 9);
        let mut clips = Vec::new();
        let mut windows = Vec::new();
        for i in 0..n_clips {
            let first = i * (clip_len + gap);
            clips.push(video.slice(first..first + clip_len).unwrap());
            windows.push(FrameWindow::new(first, first + clip_len - 1));
        }
        (clips, video, windows)
    }

    #[test]
    fn two_clips_reduce_to_single_pair() {
        let (clips, video, windows) = chain(2, 4, 5);
        let reports = evaluate_multiclip("c", &clips, &video, &windows, &stub(), &EvalConfig::default()).unwrap();
        assert_eq!(reports.len(), 2);
        let item = EvaluationItem::new("c/0", ClipPair::new(clips[0].clone(), clips[1].clone()).unwrap(), video).unwrap();
        let single = evaluate_item(&item, &stub(), &EvalConfig::default()).unwrap();
        assert_eq!(reports[0], single);
        assert_eq!(reports[1].score, single.score);
    }

    #[test]
    fn five_clips_give_four_junctions_and_their_mean() {
        let (clips, video, windows) = chain(5, 3, 4);
        let reports = evaluate_multiclip("c", &clips, &video, &windows, &stub(), &EvalConfig::default()).unwrap();
        assert_eq!(reports.len(), 5);
        let mean = reports.last().unwrap();
        assert_eq!(mean.item_id, MEAN_ROW_ID);
        let direct = reports[..4].iter().map(|r| r.score.unwrap()).sum::<f64>() / 4.0;
        assert!((mean.score.unwrap() - direct).abs() < 1e-15);
        let direct_cp = reports[..4].iter().map(|r| r.metrics.c_p.unwrap()).sum::<f64>() / 4.0;
        assert!((mean.metrics.c_p.unwrap() - direct_cp).abs() < 1e-15);
    }

    #[test]
    fn overlapping_windows_are_rejected() {
        let (clips, video, mut windows) = chain(3, 3, 4);
        windows[1] = FrameWindow::new(2, 4);
        let err = evaluate_multiclip("c", &clips, &video, &windows, &stub(), &EvalConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
