//! Periodic-motion detection from the SSIM series `SSIM(f_1, f_t)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::media::FrameSequence;
use crate::pixel::ssim::ssim;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodParams {
    pub min_prominence: f64,
    pub min_distance: usize,
    pub min_peaks: usize,
    pub max_gap_cv: f64,
}

impl Default for PeriodParams {
    fn default() -> Self {
        PeriodParams {
            min_prominence: 0.05,
            min_distance: 5,
            min_peaks: 3,
            max_gap_cv: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodReport {
    /// `SSIM(f_1, f_t)` for frames `t = 2..N` (entry `i` belongs to frame index `i + 1`).
    pub ssim_series: Vec<f64>,
    /// Zero-based frame indices of the accepted peaks.
    pub peak_indices: Vec<usize>,
    pub period_frames: Option<f64>,
    pub is_periodic: bool,
    /// Every frame matched the first one: nothing moves, so no period exists.
    pub degenerate: bool,
}

/// Local maxima of `x` with at least `min_distance` samples between kept peaks and
/// topographic prominence of at least `min_prominence`.
///
/// Plateaus report their middle sample. Endpoints are never peaks. Distance pruning
/// keeps higher peaks first (ties go to the later sample); prominence is measured
/// on the surviving set.
pub fn find_peaks(x: &[f64], min_prominence: f64, min_distance: usize) -> Vec<usize> {
    let n = x.len();
    let mut candidates = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if x[i - 1] < x[i] {
            let mut ahead = i + 1;
            while ahead + 1 < n && x[ahead] == x[i] {
                ahead += 1;
            }
            if x[ahead] < x[i] {
                candidates.push((i + ahead - 1) / 2);
                i = ahead;
            }
        }
        i += 1;
    }

    let mut keep = vec![true; candidates.len()];
    if min_distance > 1 {
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.sort_by(|&a, &b| x[candidates[a]].total_cmp(&x[candidates[b]]).then(a.cmp(&b)));
        for &idx in order.iter().rev() {
            if !keep[idx] {
                continue;
            }
            let p = candidates[idx];
            for (j, k) in keep.iter_mut().enumerate() {
                if j != idx && candidates[j].abs_diff(p) < min_distance {
                    *k = false;
                }
            }
        }
    }

    candidates
        .into_iter()
        .zip(keep)
        .filter(|&(_, k)| k)
        .map(|(p, _)| p)
        .filter(|&p| prominence(x, p) >= min_prominence)
        .collect()
}

fn prominence(x: &[f64], peak: usize) -> f64 {
    let h = x[peak];
    let mut left_min = h;
    for &v in x[..peak].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &x[peak + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

pub fn periodicity_detect(video: &FrameSequence, params: &PeriodParams) -> Result<PeriodReport> {
    if video.len() < 3 {
        return Err(Error::TooFewFrames { needed: 3, got: video.len() });
    }
    let first = video.frame(0);
    let ssim_series = video.frames()[1..]
        .iter()
        .map(|f| ssim(first, f))
        .collect::<Result<Vec<_>>>()?;

    if ssim_series.iter().all(|s| (s - 1.0).abs() <= 1e-9) {
        return Ok(PeriodReport {
            ssim_series,
            peak_indices: Vec::new(),
            period_frames: None,
            is_periodic: false,
            degenerate: true,
        });
    }

    let peak_indices: Vec<usize> = find_peaks(&ssim_series, params.min_prominence, params.min_distance)
        .into_iter()
        .map(|i| i + 1)
        .collect();
    let gaps: Vec<f64> = peak_indices.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
    let period_frames = (!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64);
    let is_periodic = match period_frames {
        Some(mean) if peak_indices.len() >= params.min_peaks => {
            let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / gaps.len() as f64;
            var.sqrt() / mean <= params.max_gap_cv
        }
        _ => false,
    };
    Ok(PeriodReport {
        ssim_series,
        peak_indices,
        period_frames,
        is_periodic,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::Frame;
    use crate::synth;

    #[test]
    fn peaks_of_simple_series() {
        let x = [0.0, 1.0, 0.0, 0.5, 0.0, 2.0, 2.0, 2.0, 0.0];
        assert_eq!(find_peaks(&x, 0.0, 1), vec![1, 3, 6]);
        // 0.5 peak has prominence 0.5
        assert_eq!(find_peaks(&x, 0.6, 1), vec![1, 6]);
        // distance pruning keeps the taller neighbour
        assert_eq!(find_peaks(&x, 0.0, 3), vec![1, 6]);
    }

    #[test]
    fn prominence_uses_higher_base() {
        let x = [0.0, 3.0, 1.0, 2.0, 0.5, 4.0, 0.0];
        assert_eq!(prominence(&x, 3), 1.0);
        assert_eq!(prominence(&x, 1), 2.5);
    }

    #[test]
    fn oscillation_with_period_24_is_periodic() {
        let v = synth::oscillating(64, 64, 120, 24.0, 5);
        let r = periodicity_detect(&v, &PeriodParams::default()).unwrap();
        let p = r.period_frames.unwrap();
        assert!((p - 24.0).abs() <= 1.0, "period {p}, peaks {:?}", r.peak_indices);
        assert!(r.is_periodic);
        assert_eq!(r.ssim_series.len(), 119);
    }

    #[test]
    fn linear_fade_has_no_peaks() {
        let v = synth::linear_fade(64, 64, 40, 2);
        let r = periodicity_detect(&v, &PeriodParams::default()).unwrap();
        assert!(r.peak_indices.is_empty());
        assert!(!r.is_periodic && r.period_frames.is_none() && !r.degenerate);
    }

    #[test]
    fn constant_video_is_degenerate() {
        let v = FrameSequence::new(vec![Frame::filled(32, 32, [0.5; 3]); 10], 24.0).unwrap();
        let r = periodicity_detect(&v, &PeriodParams::default()).unwrap();
        assert!(r.degenerate && !r.is_periodic);
    }

    #[test]
    fn recovers_periods_across_range() {
        let n = 96;
        for period in [8usize, 12, 17, 23, 32] {
            let v = synth::oscillating(32, 32, n, period as f64, period as u64);
            let r = periodicity_detect(&v, &PeriodParams::default()).unwrap();
            let p = r.period_frames.unwrap_or(0.0);
            assert!((p - period as f64).abs() <= 1.0, "period {period}: got {p}");
        }
    }
}
