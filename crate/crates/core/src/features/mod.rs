//! Metrics that rely on pretrained models, expressed against pluggable backends.
//!
//! The formulas live here; inference lives behind [`FrameEmbedder`],
//! [`FrameScorer`] and [`PerceptualExtractor`].

pub mod registry;
pub mod stub;

use crate::error::{Error, Result};
use crate::media::{Frame, FrameSequence};

pub use registry::{BackendContext, BackendNames, BackendRegistry, Backends, MODEL_CACHE_ENV};

/// Per-frame feature vector, e.g. self-supervised ViT or image-text features.
pub trait FrameEmbedder: Send + Sync {
    fn name(&self) -> &str;

    /// Whether one instance may serve several workers at once.
    fn reentrant(&self) -> bool {
        true
    }

    fn embed(&self, frame: &Frame) -> Result<Vec<f64>>;
}

/// Per-frame scalar score within [`FrameScorer::range`].
pub trait FrameScorer: Send + Sync {
    fn name(&self) -> &str;

    fn range(&self) -> (f64, f64);

    fn reentrant(&self) -> bool {
        true
    }

    fn score(&self, frame: &Frame) -> Result<f64>;
}

/// Per-frame perceptual features with every component in `[0, 1]`.
pub trait PerceptualExtractor: Send + Sync {
    fn name(&self) -> &str;

    fn reentrant(&self) -> bool {
        true
    }

    fn features(&self, frame: &Frame) -> Result<Vec<f64>>;
}

fn contract(backend: &str, message: impl Into<String>) -> Error {
    Error::BackendContract {
        backend: backend.to_string(),
        message: message.into(),
    }
}

fn unit_embeddings(video: &FrameSequence, embedder: &dyn FrameEmbedder) -> Result<Vec<Vec<f64>>> {
    let mut dim = None;
    video
        .frames()
        .iter()
        .map(|f| {
            let mut e = embedder.embed(f)?;
            match dim {
                None => dim = Some(e.len()),
                Some(d) if d != e.len() => {
                    return Err(contract(embedder.name(), format!("dimension changed from {d} to {}", e.len())))
                }
                _ => {}
            }
            if e.iter().any(|v| !v.is_finite()) {
                return Err(contract(embedder.name(), "non-finite embedding"));
            }
            let norm = e.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(contract(embedder.name(), "zero embedding cannot be normalized"));
            }
            e.iter_mut().for_each(|v| *v /= norm);
            Ok(e)
        })
        .collect()
}

fn clamped_cosine(a: &[f64], b: &[f64]) -> f64 {
    // exact for self-similarity; the dot product of a unit vector with itself can round below 1
    if a == b {
        return 1.0;
    }
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().clamp(0.0, 1.0)
}

/// Mean over `t = 2..N-1` of the average clamped cosine between frame `t` and the
/// first, previous and last frames. Inputs must be L2-normalized.
pub fn temporal_consistency(unit: &[Vec<f64>]) -> Result<f64> {
    let n = unit.len();
    if n < 3 {
        return Err(Error::TooFewFrames { needed: 3, got: n });
    }
    let (first, last) = (&unit[0], &unit[n - 1]);
    let sum: f64 = (1..n - 1)
        .map(|t| {
            let e = &unit[t];
            (clamped_cosine(first, e) + clamped_cosine(&unit[t - 1], e) + clamped_cosine(e, last)) / 3.0
        })
        .sum();
    Ok(sum / (n - 2) as f64)
}

fn embedding_consistency(video: &FrameSequence, embedder: &dyn FrameEmbedder) -> Result<f64> {
    if video.len() < 3 {
        return Err(Error::TooFewFrames { needed: 3, got: video.len() });
    }
    temporal_consistency(&unit_embeddings(video, embedder)?)
}

/// `Q_S` with a subject-feature backend.
pub fn subject_consistency(video: &FrameSequence, embedder: &dyn FrameEmbedder) -> Result<f64> {
    embedding_consistency(video, embedder)
}

/// `Q_B` with a background-feature backend. Same kernel as `Q_S`.
pub fn background_consistency(video: &FrameSequence, embedder: &dyn FrameEmbedder) -> Result<f64> {
    embedding_consistency(video, embedder)
}

/// Mean per-frame score mapped linearly from the scorer's declared range onto `[0, 1]`.
pub fn normalized_mean_score(video: &FrameSequence, scorer: &dyn FrameScorer) -> Result<f64> {
    let (lo, hi) = scorer.range();
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(contract(scorer.name(), format!("invalid declared range [{lo}, {hi}]")));
    }
    let mut sum = 0.0;
    for f in video.frames() {
        let s = scorer.score(f)?;
        if !(s.is_finite() && (lo..=hi).contains(&s)) {
            return Err(contract(scorer.name(), format!("score {s} outside [{lo}, {hi}]")));
        }
        sum += s;
    }
    Ok((sum / video.len() as f64 - lo) / (hi - lo))
}

fn require_range(scorer: &dyn FrameScorer, expected: (f64, f64)) -> Result<()> {
    if scorer.range() != expected {
        return Err(contract(
            scorer.name(),
            format!("declares range {:?}, expected {expected:?}", scorer.range()),
        ));
    }
    Ok(())
}

/// `Q_A`: mean aesthetic score on the 0-10 scale, divided by 10.
pub fn aesthetic_score(video: &FrameSequence, scorer: &dyn FrameScorer) -> Result<f64> {
    require_range(scorer, (0.0, 10.0))?;
    normalized_mean_score(video, scorer)
}

/// `Q_I`: mean image-quality score on the 0-100 scale, divided by 100.
pub fn imaging_quality(video: &FrameSequence, scorer: &dyn FrameScorer) -> Result<f64> {
    require_range(scorer, (0.0, 100.0))?;
    normalized_mean_score(video, scorer)
}

/// `T_LP = 1 - mean_t mean_d |V(I_t) - V(I_{t-1})|`.
pub fn local_perceptual_consistency(video: &FrameSequence, extractor: &dyn PerceptualExtractor) -> Result<f64> {
    if video.len() < 2 {
        return Err(Error::TooFewFrames { needed: 2, got: video.len() });
    }
    let feats = video
        .frames()
        .iter()
        .map(|f| {
            let v = extractor.features(f)?;
            if v.is_empty() {
                return Err(contract(extractor.name(), "empty feature vector"));
            }
            if let Some(bad) = v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(contract(extractor.name(), format!("component {bad} outside [0, 1]")));
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut eps = 0.0;
    for pair in feats.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.len() != b.len() {
            return Err(contract(extractor.name(), "feature dimension changed between frames"));
        }
        eps += a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64;
    }
    eps /= (feats.len() - 1) as f64;
    Ok(1.0 - eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Looks up a fixed vector by the frame's red value at (0, 0).
    struct TableEmbedder(Vec<Vec<f64>>);

    impl FrameEmbedder for TableEmbedder {
        fn name(&self) -> &str {
            "table"
        }
        fn embed(&self, frame: &Frame) -> Result<Vec<f64>> {
            Ok(self.0[(frame.pixel(0, 0)[0] * 100.0).round() as usize].clone())
        }
    }

    struct TableScorer {
        scores: Vec<f64>,
        range: (f64, f64),
    }

    impl FrameScorer for TableScorer {
        fn name(&self) -> &str {
            "table"
        }
        fn range(&self) -> (f64, f64) {
            self.range
        }
        fn score(&self, frame: &Frame) -> Result<f64> {
            Ok(self.scores[(frame.pixel(0, 0)[0] * 100.0).round() as usize])
        }
    }

    struct TableFeatures(Vec<Vec<f64>>);

    impl PerceptualExtractor for TableFeatures {
        fn name(&self) -> &str {
            "table"
        }
        fn features(&self, frame: &Frame) -> Result<Vec<f64>> {
            Ok(self.0[(frame.pixel(0, 0)[0] * 100.0).round() as usize].clone())
        }
    }

    /// Frames tagged 0, 1, ... so table backends can tell them apart.
    fn tagged(n: usize) -> FrameSequence {
        FrameSequence::new((0..n).map(|i| Frame::filled(2, 2, [i as f32 / 100.0, 0.0, 0.0])).collect(), 24.0).unwrap()
    }

    fn eq5_brute(e: &[Vec<f64>]) -> f64 {
        let cos = |a: &Vec<f64>, b: &Vec<f64>| {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            (dot / (na * nb)).max(0.0)
        };
        let n = e.len();
        let mut total = 0.0;
        for t in 2..=n - 1 {
            let (i1, it, iprev, in_) = (&e[0], &e[t - 1], &e[t - 2], &e[n - 1]);
            total += (cos(i1, it) + cos(iprev, it) + cos(it, in_)) / 3.0;
        }
        total / (n - 2) as f64
    }

    #[test]
    fn identical_frames_are_fully_consistent() {
        let v = FrameSequence::new(vec![Frame::filled(8, 8, [0.3, 0.4, 0.5]); 5], 24.0).unwrap();
        let e = stub::HistogramEmbedder::default();
        assert_eq!(subject_consistency(&v, &e).unwrap(), 1.0);
        assert_eq!(background_consistency(&v, &stub::GridEmbedder::default()).unwrap(), 1.0);
    }

    #[test]
    fn orthogonal_embeddings_score_zero() {
        let basis = (0..5).map(|i| (0..5).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let e = TableEmbedder(basis);
        assert_eq!(subject_consistency(&tagged(5), &e).unwrap(), 0.0);
        assert_eq!(background_consistency(&tagged(5), &e).unwrap(), 0.0);
    }

    #[test]
    fn four_frame_hand_evaluation() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let e = TableEmbedder(vec![vec![1.0, 0.0], vec![h, h], vec![0.0, 1.0], vec![1.0, 0.0]]);
        // t=2: (cos(e1,e2) + cos(e1,e2) + cos(e2,e4)) / 3 = (h + h + h) / 3 = h
        // t=3: (cos(e1,e3) + cos(e2,e3) + cos(e3,e4)) / 3 = (0 + h + 0) / 3
        let expected = (h + h / 3.0) / 2.0;
        let q = subject_consistency(&tagged(4), &e).unwrap();
        assert!((q - expected).abs() < 1e-12);
        assert!((q - eq5_brute(&e.0)).abs() < 1e-12);
    }

    #[test]
    fn negative_cosines_are_clamped() {
        let e = TableEmbedder(vec![vec![1.0], vec![-1.0], vec![1.0]]);
        assert_eq!(subject_consistency(&tagged(3), &e).unwrap(), 0.0);
    }

    #[test]
    fn too_few_frames_and_contract_errors() {
        let e = stub::HistogramEmbedder::default();
        assert!(matches!(subject_consistency(&tagged(2), &e), Err(Error::TooFewFrames { .. })));
        let zero = TableEmbedder(vec![vec![0.0, 0.0]; 3]);
        assert!(matches!(subject_consistency(&tagged(3), &zero), Err(Error::BackendContract { .. })));
        let ragged = TableEmbedder(vec![vec![1.0], vec![1.0, 0.0], vec![1.0]]);
        assert!(subject_consistency(&tagged(3), &ragged).is_err());
    }

    #[test]
    fn aesthetic_normalization() {
        let s = |scores: Vec<f64>| TableScorer { scores, range: (0.0, 10.0) };
        assert_eq!(aesthetic_score(&tagged(3), &s(vec![10.0; 3])).unwrap(), 1.0);
        assert!((aesthetic_score(&tagged(3), &s(vec![5.5; 3])).unwrap() - 0.55).abs() < 1e-12);
        assert!((aesthetic_score(&tagged(3), &s(vec![2.0, 4.0, 9.0])).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(
            aesthetic_score(&tagged(2), &s(vec![3.0, 11.0])),
            Err(Error::BackendContract { .. })
        ));
    }

    #[test]
    fn imaging_normalization() {
        let s = |scores: Vec<f64>| TableScorer { scores, range: (0.0, 100.0) };
        assert_eq!(imaging_quality(&tagged(2), &s(vec![100.0; 2])).unwrap(), 1.0);
        assert_eq!(imaging_quality(&tagged(2), &s(vec![0.0; 2])).unwrap(), 0.0);
        assert!((imaging_quality(&tagged(2), &s(vec![60.0, 80.0])).unwrap() - 0.7).abs() < 1e-12);
        assert!(imaging_quality(&tagged(1), &s(vec![-1.0])).is_err());
        // a 0-10 scorer cannot stand in for image quality
        let wrong = TableScorer { scores: vec![1.0], range: (0.0, 10.0) };
        assert!(imaging_quality(&tagged(1), &wrong).is_err());
    }

    #[test]
    fn perceptual_consistency_cases() {
        let same = TableFeatures(vec![vec![0.4; 4]; 3]);
        assert_eq!(local_perceptual_consistency(&tagged(3), &same).unwrap(), 1.0);
        let alt = TableFeatures(vec![vec![0.0; 4], vec![1.0; 4], vec![0.0; 4]]);
        assert_eq!(local_perceptual_consistency(&tagged(3), &alt).unwrap(), 0.0);
        let step = TableFeatures(vec![vec![0.0; 4], vec![0.25; 4], vec![0.25; 4]]);
        assert!((local_perceptual_consistency(&tagged(3), &step).unwrap() - 0.875).abs() < 1e-12);
        let bad = TableFeatures(vec![vec![0.0], vec![1.5]]);
        assert!(matches!(
            local_perceptual_consistency(&tagged(2), &bad),
            Err(Error::BackendContract { .. })
        ));
    }

    #[test]
    fn brute_force_agreement_on_random_embeddings() {
        use rand::{Rng, SeedableRng};
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in 3..=10 {
            for _ in 0..20 {
                let table: Vec<Vec<f64>> = (0..n).map(|_| (0..6).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
                let e = TableEmbedder(table.clone());
                let q = subject_consistency(&tagged(n), &e).unwrap();
                assert!((q - eq5_brute(&table)).abs() < 1e-12);
                assert!((0.0..=1.0).contains(&q));
            }
        }
    }

    #[test]
    fn backend_errors_propagate() {
        struct Failing;
        impl FrameEmbedder for Failing {
            fn name(&self) -> &str {
                "failing"
            }
            fn embed(&self, _: &Frame) -> Result<Vec<f64>> {
                Err(Error::Backend {
                    backend: "failing".into(),
                    message: "weights missing".into(),
                })
            }
        }
        let err = subject_consistency(&tagged(3), &Failing).unwrap_err();
        assert!(matches!(err, Error::Backend { .. }));
    }
}
