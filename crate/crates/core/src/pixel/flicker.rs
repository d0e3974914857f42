//! Flicker severity `Q_F`: share of patches whose luma/colour change between
//! adjacent frames exceeds a threshold, averaged over all transitions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::media::{hue_distance, rgb_to_hsv, rgb_to_yuv, FrameSequence, Planes};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlickerConfig {
    pub patch_size: usize,
    pub eta: f64,
}

impl Default for FlickerConfig {
    fn default() -> Self {
        FlickerConfig {
            patch_size: 32,
            eta: 0.1,
        }
    }
}

impl FlickerConfig {
    pub fn new(patch_size: usize, eta: f64) -> Result<Self> {
        let cfg = FlickerConfig { patch_size, eta };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.patch_size < 2 {
            return Err(Error::Config(format!("flicker patch size must be >= 2, got {}", self.patch_size)));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::Config(format!("flicker threshold must lie in (0, 1), got {}", self.eta)));
        }
        Ok(())
    }
}

/// Per-patch change scores `(L + C) / 2` for one frame transition, row-major over patches.
///
/// `L` is the mean absolute Y difference. `C` is the mean over pixels of
/// `(2 * cyclic_hue_distance + |dS|) / 2`, so both terms lie in `[0, 1]`.
pub fn patch_changes(a: (&Planes, &Planes), b: (&Planes, &Planes), patch: usize) -> Vec<f64> {
    let (yuv_a, hsv_a) = a;
    let (yuv_b, hsv_b) = b;
    let (h, w) = (yuv_a.height, yuv_a.width);
    let py = h / patch;
    let px = w / patch;
    let oy = (h - py * patch) / 2;
    let ox = (w - px * patch) / 2;
    let area = (patch * patch) as f64;
    let mut out = Vec::with_capacity(py * px);
    for pyi in 0..py {
        for pxi in 0..px {
            let mut l = 0.0;
            let mut c = 0.0;
            for y in oy + pyi * patch..oy + (pyi + 1) * patch {
                for x in ox + pxi * patch..ox + (pxi + 1) * patch {
                    l += (yuv_a.at(0, y, x) - yuv_b.at(0, y, x)).abs();
                    let dh = 2.0 * hue_distance(hsv_a.at(0, y, x), hsv_b.at(0, y, x));
                    let ds = (hsv_a.at(1, y, x) - hsv_b.at(1, y, x)).abs();
                    c += (dh + ds) / 2.0;
                }
            }
            out.push((l / area + c / area) / 2.0);
        }
    }
    out
}

pub fn flicker_severity(video: &FrameSequence, cfg: &FlickerConfig) -> Result<f64> {
    cfg.validate()?;
    if video.len() < 2 {
        return Err(Error::TooFewFrames { needed: 2, got: video.len() });
    }
    let (h, w) = video.shape();
    if cfg.patch_size > h || cfg.patch_size > w {
        return Err(Error::dim(format!("{}px patch larger than {h}x{w} frame", cfg.patch_size)));
    }
    let converted: Vec<(Planes, Planes)> = video.frames().iter().map(|f| (rgb_to_yuv(f), rgb_to_hsv(f))).collect();
    let mut ratio_sum = 0.0;
    for pair in converted.windows(2) {
        let changes = patch_changes((&pair[0].0, &pair[0].1), (&pair[1].0, &pair[1].1), cfg.patch_size);
        let flickering = changes.iter().filter(|&&c| c > cfg.eta).count();
        ratio_sum += flickering as f64 / changes.len() as f64;
    }
    Ok(ratio_sum / (video.len() - 1) as f64)
}
