//! Start/end clip window extraction.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::scenes::SceneCutList;
use crate::error::{Error, Result};
use crate::media::FrameWindow;

const MAX_DRAWS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClipExtractionPolicy {
    /// Length of the excerpt holding both clips and the gap between them.
    pub total_seconds: f64,
    pub min_clip_seconds: f64,
    pub max_clip_seconds: f64,
    /// Frames on each side of a cut that neither clip may touch.
    pub transition_margin_frames: usize,
}

impl Default for ClipExtractionPolicy {
    fn default() -> Self {
        ClipExtractionPolicy {
            total_seconds: 5.0,
            min_clip_seconds: 2.0,
            max_clip_seconds: 4.0,
            transition_margin_frames: 3,
        }
    }
}

impl ClipExtractionPolicy {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.total_seconds, self.min_clip_seconds, self.max_clip_seconds]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.min_clip_seconds <= 0.0 || self.max_clip_seconds < self.min_clip_seconds {
            return Err(Error::Policy(format!(
                "clip durations must satisfy 0 < min <= max, got [{}, {}]",
                self.min_clip_seconds, self.max_clip_seconds
            )));
        }
        if 2.0 * self.min_clip_seconds >= self.total_seconds {
            return Err(Error::Policy(format!(
                "two clips of at least {} s leave no middle in {} s",
                self.min_clip_seconds, self.total_seconds
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipWindows {
    pub start: FrameWindow,
    pub end: FrameWindow,
}

/// Independent uniform durations, redrawn until both fit in the excerpt with at
/// least `gap` frames between them. Returns frame counts.
fn draw_lengths(
    policy: &ClipExtractionPolicy,
    fps: f64,
    excerpt: usize,
    gap: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(usize, usize)> {
    for _ in 0..MAX_DRAWS {
        let mut draw = || {
            if policy.max_clip_seconds > policy.min_clip_seconds {
                rng.gen_range(policy.min_clip_seconds..=policy.max_clip_seconds)
            } else {
                policy.min_clip_seconds
            }
        };
        let (ds, de) = (draw(), draw());
        if ds + de >= policy.total_seconds {
            continue;
        }
        let ns = ((ds * fps).round() as usize).max(1);
        let ne = ((de * fps).round() as usize).max(1);
        if ns + ne + gap <= excerpt {
            return Ok((ns, ne));
        }
    }
    Err(Error::Policy(format!(
        "no clip durations in [{}, {}] s leave {gap} free frames in {} s after {MAX_DRAWS} draws",
        policy.min_clip_seconds, policy.max_clip_seconds, policy.total_seconds
    )))
}

/// Picks an excerpt of `total_seconds` and places the start clip at its head and
/// the end clip at its tail. Two-scene videos centre the excerpt on the cut as far
/// as the margins allow, keeping the start clip in the first scene and the end
/// clip in the second.
pub fn extract_clip_windows(
    frames: usize,
    fps: f64,
    cuts: &SceneCutList,
    policy: &ClipExtractionPolicy,
    seed: u64,
) -> Result<ClipWindows> {
    policy.validate()?;
    if cuts.scene_count() > 2 {
        return Err(Error::Extraction(format!("{} scenes; at most 2 are supported", cuts.scene_count())));
    }
    let excerpt = (policy.total_seconds * fps).round() as usize;
    if frames < excerpt {
        return Err(Error::Policy(format!(
            "video has {frames} frames, the {} s excerpt needs {excerpt}",
            policy.total_seconds
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // a two-scene excerpt must also fit the cut and its margins between the clips
    let gap = match cuts.cuts.first() {
        None => 1,
        Some(_) => 2 * policy.transition_margin_frames + 1,
    };
    let (ns, ne) = draw_lengths(policy, fps, excerpt, gap, &mut rng)?;

    let offset = match cuts.cuts.first() {
        None => 0,
        Some(&cut) => {
            let m = policy.transition_margin_frames;
            // start.last = o + ns - 1 <= cut - m - 1 and end.first = o + excerpt - ne >= cut + m + 1
            let hi = (cut + 1).checked_sub(m + 1 + ns).map(|v| v.min(frames - excerpt));
            let lo = (cut + m + 1 + ne).saturating_sub(excerpt);
            match hi {
                Some(hi) if lo <= hi => (cut.saturating_sub(excerpt / 2)).clamp(lo, hi),
                _ => {
                    return Err(Error::Extraction(format!(
                        "cut at frame {cut} leaves no room for clips of {ns} and {ne} frames with margin {m}"
                    )))
                }
            }
        }
    };
    Ok(ClipWindows {
        start: FrameWindow::new(offset, offset + ns - 1),
        end: FrameWindow::new(offset + excerpt - ne, offset + excerpt - 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single() -> SceneCutList {
        SceneCutList::default()
    }

    #[test]
    fn single_scene_windows_respect_policy() {
        let w = extract_clip_windows(240, 24.0, &single(), &ClipExtractionPolicy::default(), 7).unwrap();
        let (s, e) = (w.start.len() as f64 / 24.0, w.end.len() as f64 / 24.0);
        assert!((2.0..=4.0).contains(&s) && (2.0..=4.0).contains(&e));
        assert!(s + e < 5.0);
        assert_eq!(w.start.first(), 0);
        assert_eq!(w.end.last(), 119);
        assert!(w.start.last() < w.end.first());
        assert_eq!(w, extract_clip_windows(240, 24.0, &single(), &ClipExtractionPolicy::default(), 7).unwrap());
    }

    #[test]
    fn two_scene_windows_avoid_cut_margin() {
        let policy = ClipExtractionPolicy {
            transition_margin_frames: 6,
            ..Default::default()
        };
        let cuts = SceneCutList { cuts: vec![120] };
        for seed in 0..20 {
            let w = extract_clip_windows(300, 24.0, &cuts, &policy, seed).unwrap();
            assert!(w.start.last() <= 113, "{w:?}");
            assert!(w.end.first() >= 127, "{w:?}");
        }
    }

    #[test]
    fn short_video_is_a_policy_error() {
        let err = extract_clip_windows(72, 24.0, &single(), &ClipExtractionPolicy::default(), 1).unwrap_err();
        assert!(matches!(err, Error::Policy(_)));
    }

    #[test]
    fn cut_near_boundary_is_an_extraction_error() {
        let cuts = SceneCutList { cuts: vec![10] };
        let err = extract_clip_windows(300, 24.0, &cuts, &ClipExtractionPolicy::default(), 1).unwrap_err();
        assert!(matches!(err, Error::Extraction(_)));
        let three = SceneCutList { cuts: vec![100, 200] };
        assert!(extract_clip_windows(300, 24.0, &three, &ClipExtractionPolicy::default(), 1).is_err());
    }

    #[test]
    fn infeasible_policy() {
        let p = ClipExtractionPolicy {
            min_clip_seconds: 3.0,
            ..Default::default()
        };
        assert!(matches!(p.validate(), Err(Error::Policy(_))));
    }

    proptest! {
        #[test]
        fn windows_always_valid(frames in 120usize..600, cut_frac in proptest::option::of(0.0f64..1.0), seed in 0u64..1000) {
            let policy = ClipExtractionPolicy::default();
            let cuts = match cut_frac {
                Some(f) => SceneCutList { cuts: vec![1 + (f * (frames - 2) as f64) as usize] },
                None => single(),
            };
            if let Ok(w) = extract_clip_windows(frames, 24.0, &cuts, &policy, seed) {
                prop_assert!(w.start.last() < w.end.first());
                prop_assert!(w.end.last() < frames);
                prop_assert_eq!(w.end.last() + 1 - w.start.first(), 120);
                if let Some(&c) = cuts.cuts.first() {
                    prop_assert!(w.start.last() + 3 < c && w.end.first() > c + 3);
                }
            }
        }
    }
}
