//! Content-based shot boundary detection.

use serde::{Deserialize, Serialize};

use crate::media::{rgb_to_hsv, Frame, FrameSequence};

const H_BINS: usize = 8;
const S_BINS: usize = 4;
const V_BINS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneParams {
    /// Histogram distance in `[0, 1]` above which consecutive frames are a cut.
    pub threshold: f64,
    /// Frames a scene must last before another cut is accepted.
    pub min_scene_len: usize,
}

impl Default for SceneParams {
    fn default() -> Self {
        SceneParams {
            threshold: 0.3,
            min_scene_len: 12,
        }
    }
}

/// Frame indices where a new scene begins, strictly increasing, never 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneCutList {
    pub cuts: Vec<usize>,
}

impl SceneCutList {
    pub fn scene_count(&self) -> usize {
        self.cuts.len() + 1
    }
}

/// Joint HSV histogram with 8x4x4 bins, normalized to sum 1.
pub fn hsv_histogram(frame: &Frame) -> Vec<f64> {
    let hsv = rgb_to_hsv(frame);
    let n = hsv.height * hsv.width;
    let bin = |v: f64, bins: usize| ((v * bins as f64) as usize).min(bins - 1);
    let mut hist = vec![0.0; H_BINS * S_BINS * V_BINS];
    for i in 0..n {
        let (h, s, v) = (hsv.planes[0][i], hsv.planes[1][i], hsv.planes[2][i]);
        hist[(bin(h, H_BINS) * S_BINS + bin(s, S_BINS)) * V_BINS + bin(v, V_BINS)] += 1.0;
    }
    hist.iter_mut().for_each(|c| *c /= n as f64);
    hist
}

/// Total variation distance between two normalized histograms.
pub fn histogram_distance(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

pub fn detect_scenes(video: &FrameSequence, params: &SceneParams) -> SceneCutList {
    let hists: Vec<Vec<f64>> = video.frames().iter().map(hsv_histogram).collect();
    let mut cuts = Vec::new();
    let mut scene_start = 0;
    for t in 1..hists.len() {
        if histogram_distance(&hists[t - 1], &hists[t]) > params.threshold && t - scene_start >= params.min_scene_len {
            cuts.push(t);
            scene_start = t;
        }
    }
    SceneCutList { cuts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    const RED: [f32; 3] = [0.9, 0.1, 0.1];
    const BLUE: [f32; 3] = [0.1, 0.1, 0.9];
    const GREEN: [f32; 3] = [0.1, 0.8, 0.2];

    #[test]
    fn constant_video_has_no_cuts() {
        let v = synth::splice(16, 16, &[(RED, 30)]);
        assert!(detect_scenes(&v, &SceneParams::default()).cuts.is_empty());
    }

    #[test]
    fn red_then_blue_cuts_at_junction() {
        let v = synth::splice(16, 16, &[(RED, 20), (BLUE, 25)]);
        let s = detect_scenes(&v, &SceneParams::default());
        assert_eq!(s.cuts, vec![20]);
        assert_eq!(s.scene_count(), 2);
    }

    #[test]
    fn three_segments_give_two_cuts() {
        let v = synth::splice(16, 16, &[(RED, 15), (BLUE, 15), (GREEN, 15)]);
        assert_eq!(detect_scenes(&v, &SceneParams::default()).cuts, vec![15, 30]);
    }

    #[test]
    fn short_scenes_are_merged() {
        let v = synth::splice(16, 16, &[(RED, 15), (BLUE, 5), (GREEN, 15)]);
        assert_eq!(detect_scenes(&v, &SceneParams::default()).cuts, vec![15]);
    }

    #[test]
    fn smooth_pan_has_no_cuts() {
        let v = synth::pan(32, 32, 60, 2, 3);
        assert!(detect_scenes(&v, &SceneParams::default()).cuts.is_empty());
    }
}
