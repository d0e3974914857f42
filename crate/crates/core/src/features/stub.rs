//! Deterministic backends computed from plain frame statistics.
//!
//! They carry no learned weights and only approximate what the pretrained
//! models measure. Their purpose is reproducible CI and desk-scale runs.
//!
//! | name              | role        | definition                                                     |
//! |-------------------|-------------|----------------------------------------------------------------|
//! | `stub-histogram`  | embedder    | joint RGB histogram, 4 bins per channel (64 dims, sums to 1)   |
//! | `stub-grid`       | embedder    | 4x4 grid of mean RGB plus a constant 1 (49 dims)               |
//! | `stub-aesthetic`  | scorer 0-10 | `10 * (exposure + contrast) / 2`                               |
//! | `stub-imaging`    | scorer 0-100| `100 * g / (g + 0.05)`, `g` = mean absolute luma gradient      |
//! | `stub-perceptual` | extractor   | 8x8 grid of mean RGB (192 dims in `[0, 1]`)                    |
//!
//! with `exposure = 1 - 2 |mean(Y) - 1/2|` and `contrast = min(1, 4 std(Y))`.

use crate::error::Result;
use crate::features::{FrameEmbedder, FrameScorer, PerceptualExtractor};
use crate::media::Frame;

pub const HISTOGRAM: &str = "stub-histogram";
pub const GRID: &str = "stub-grid";
pub const AESTHETIC: &str = "stub-aesthetic";
pub const IMAGING: &str = "stub-imaging";
pub const PERCEPTUAL: &str = "stub-perceptual";

fn grid_means(frame: &Frame, cells: usize) -> Vec<f64> {
    let (h, w) = frame.shape();
    let mut out = Vec::with_capacity(cells * cells * 3);
    for gy in 0..cells {
        let (y0, y1) = (gy * h / cells, ((gy + 1) * h / cells).max(gy * h / cells + 1).min(h));
        for gx in 0..cells {
            let (x0, x1) = (gx * w / cells, ((gx + 1) * w / cells).max(gx * w / cells + 1).min(w));
            let mut acc = [0.0f64; 3];
            for y in y0..y1 {
                for x in x0..x1 {
                    let p = frame.pixel(y, x);
                    for k in 0..3 {
                        acc[k] += p[k] as f64;
                    }
                }
            }
            let n = ((y1 - y0) * (x1 - x0)) as f64;
            out.extend(acc.iter().map(|v| (v / n).clamp(0.0, 1.0)));
        }
    }
    out
}

#[derive(Clone, Debug, Default)]
pub struct HistogramEmbedder;

impl FrameEmbedder for HistogramEmbedder {
    fn name(&self) -> &str {
        HISTOGRAM
    }

    fn embed(&self, frame: &Frame) -> Result<Vec<f64>> {
        const BINS: usize = 4;
        let mut hist = vec![0.0; BINS * BINS * BINS];
        let bin = |v: f32| ((v * BINS as f32) as usize).min(BINS - 1);
        for p in frame.pixels().chunks_exact(3) {
            hist[(bin(p[0]) * BINS + bin(p[1])) * BINS + bin(p[2])] += 1.0;
        }
        let n = (frame.height() * frame.width()) as f64;
        hist.iter_mut().for_each(|v| *v /= n);
        Ok(hist)
    }
}

#[derive(Clone, Debug, Default)]
pub struct GridEmbedder;

impl FrameEmbedder for GridEmbedder {
    fn name(&self) -> &str {
        GRID
    }

    fn embed(&self, frame: &Frame) -> Result<Vec<f64>> {
        let mut v = grid_means(frame, 4);
        v.push(1.0);
        Ok(v)
    }
}

fn luma_mean_std(frame: &Frame) -> (f64, f64) {
    let l = frame.luma();
    let n = l.len() as f64;
    let mean = l.iter().sum::<f64>() / n;
    let var = l.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Clone, Debug, Default)]
pub struct AestheticScorer;

impl AestheticScorer {
    pub fn formula(mean_luma: f64, std_luma: f64) -> f64 {
        let exposure = 1.0 - 2.0 * (mean_luma - 0.5).abs();
        let contrast = (4.0 * std_luma).min(1.0);
        (10.0 * (exposure + contrast) / 2.0).clamp(0.0, 10.0)
    }
}

impl FrameScorer for AestheticScorer {
    fn name(&self) -> &str {
        AESTHETIC
    }

    fn range(&self) -> (f64, f64) {
        (0.0, 10.0)
    }

    fn score(&self, frame: &Frame) -> Result<f64> {
        let (mean, std) = luma_mean_std(frame);
        Ok(Self::formula(mean, std))
    }
}

#[derive(Clone, Debug, Default)]
pub struct ImagingScorer;

impl ImagingScorer {
    pub fn formula(mean_gradient: f64) -> f64 {
        100.0 * mean_gradient / (mean_gradient + 0.05)
    }

    pub fn mean_gradient(frame: &Frame) -> f64 {
        let (h, w) = frame.shape();
        let l = frame.luma();
        let mut sum = 0.0;
        let mut n = 0usize;
        for y in 0..h {
            for x in 0..w {
                let v = l[y * w + x];
                if x + 1 < w {
                    sum += (l[y * w + x + 1] - v).abs();
                    n += 1;
                }
                if y + 1 < h {
                    sum += (l[(y + 1) * w + x] - v).abs();
                    n += 1;
                }
            }
        }
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }
}

impl FrameScorer for ImagingScorer {
    fn name(&self) -> &str {
        IMAGING
    }

    fn range(&self) -> (f64, f64) {
        (0.0, 100.0)
    }

    fn score(&self, frame: &Frame) -> Result<f64> {
        Ok(Self::formula(Self::mean_gradient(frame)))
    }
}

#[derive(Clone, Debug, Default)]
pub struct GridPerceptual;

impl PerceptualExtractor for GridPerceptual {
    fn name(&self) -> &str {
        PERCEPTUAL
    }

    fn features(&self, frame: &Frame) -> Result<Vec<f64>> {
        Ok(grid_means(frame, 8))
    }
}

/// The stub trio used when no pretrained backends are configured.
pub fn builtin_stub_backends() -> (HistogramEmbedder, AestheticScorer, GridPerceptual) {
    (HistogramEmbedder, AestheticScorer, GridPerceptual)
}
