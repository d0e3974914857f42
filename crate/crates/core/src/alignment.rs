//! DTW frame alignment and the connecting distance `T_CD`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::media::{EvaluationItem, Frame};
use crate::pixel::ssim::ssim;

/// Monotone correspondence between a reference and a generated sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentPath {
    pub pairs: Vec<(usize, usize)>,
}

impl AlignmentPath {
    /// Number of steps that advance only one index.
    pub fn non_diagonal_steps(&self) -> usize {
        self.pairs
            .windows(2)
            .filter(|w| w[1].0 == w[0].0 || w[1].1 == w[0].1)
            .count()
    }

    /// Sum of `cost[r][g]` along the path.
    pub fn total_cost(&self, cost: &[Vec<f64>]) -> f64 {
        self.pairs.iter().map(|&(r, g)| cost[r][g]).sum()
    }
}

/// Minimum-cost path through a dense cost matrix (`cost[r][g]`, all rows the same
/// length). Steps are `(1,0)`, `(0,1)`, `(1,1)`; on ties the diagonal wins, then
/// the step that advances the reference.
pub fn dtw_from_costs(cost: &[Vec<f64>]) -> Result<AlignmentPath> {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyVideo);
    }
    if cost.iter().any(|r| r.len() != cols) {
        return Err(Error::dim("cost matrix rows differ in length"));
    }
    if cost.iter().flatten().any(|c| !c.is_finite() || *c < 0.0) {
        return Err(Error::NonFinite("dtw cost".into()));
    }

    let mut acc = vec![vec![f64::INFINITY; cols]; rows];
    for r in 0..rows {
        for g in 0..cols {
            let best = if r == 0 && g == 0 {
                0.0
            } else {
                let diag = if r > 0 && g > 0 { acc[r - 1][g - 1] } else { f64::INFINITY };
                let up = if r > 0 { acc[r - 1][g] } else { f64::INFINITY };
                let left = if g > 0 { acc[r][g - 1] } else { f64::INFINITY };
                diag.min(up).min(left)
            };
            acc[r][g] = cost[r][g] + best;
        }
    }

    let (mut r, mut g) = (rows - 1, cols - 1);
    let mut pairs = vec![(r, g)];
    while (r, g) != (0, 0) {
        (r, g) = if r == 0 {
            (0, g - 1)
        } else if g == 0 {
            (r - 1, 0)
        } else {
            let (diag, up, left) = (acc[r - 1][g - 1], acc[r - 1][g], acc[r][g - 1]);
            if diag <= up && diag <= left {
                (r - 1, g - 1)
            } else if up <= left {
                (r - 1, g)
            } else {
                (r, g - 1)
            }
        };
        pairs.push((r, g));
    }
    pairs.reverse();
    Ok(AlignmentPath { pairs })
}

/// Fills the cost matrix in parallel, then runs [`dtw_from_costs`].
pub fn dtw_align<F>(reference: &[Frame], generated: &[Frame], cost: F) -> Result<AlignmentPath>
where
    F: Fn(&Frame, &Frame) -> Result<f64> + Sync,
{
    let matrix = reference
        .par_iter()
        .map(|a| generated.iter().map(|b| cost(a, b)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    dtw_from_costs(&matrix)
}

/// `1 - SSIM`, floored at zero.
pub fn ssim_cost(a: &Frame, b: &Frame) -> Result<f64> {
    Ok((1.0 - ssim(a, b)?).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectingDistanceConfig {
    /// Corresponding pairs sampled across both sides.
    pub k: usize,
    /// Middle frames sampled.
    pub z: usize,
    /// Floor for the frame distance `d`.
    pub min_distance: usize,
}

impl Default for ConnectingDistanceConfig {
    fn default() -> Self {
        ConnectingDistanceConfig { k: 8, z: 8, min_distance: 1 }
    }
}

impl ConnectingDistanceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.z == 0 {
            return Err(Error::Config("connecting distance needs k >= 1 and z >= 1".into()));
        }
        if self.min_distance == 0 {
            return Err(Error::Config("connecting distance needs min_distance >= 1".into()));
        }
        Ok(())
    }
}

/// `k` evenly spaced indices into `0..len` (`round(i (len-1) / (k-1))`), repeated
/// when `k > len`.
pub fn even_indices(len: usize, k: usize) -> Vec<usize> {
    if len == 0 || k == 0 {
        return Vec::new();
    }
    if k == 1 {
        return vec![(len - 1) / 2];
    }
    (0..k)
        .map(|i| ((i * (len - 1)) as f64 / (k - 1) as f64).round() as usize)
        .collect()
}

/// One sampled correspondence: original frame `I` and its aligned generated frame `I_G`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    pub side: Side,
    /// Index of `I` inside its clip.
    pub clip_index: usize,
    /// Position of `I` in the generated timeline.
    pub position: usize,
    /// Index of `I_G` in the generated video.
    pub generated_index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Start,
    End,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectingDistanceReport {
    pub value: f64,
    pub start_path: AlignmentPath,
    pub end_path: AlignmentPath,
    pub pairs: Vec<Correspondence>,
    pub middle: Vec<usize>,
    /// `terms[p][m]` for sampled pair `p` and middle frame `m`.
    pub terms: Vec<Vec<f64>>,
}

/// `T_CD` with its intermediate sampling, for inspection.
pub fn connecting_distance_detailed(
    item: &EvaluationItem,
    cfg: &ConnectingDistanceConfig,
) -> Result<ConnectingDistanceReport> {
    cfg.validate()?;
    let middle_range = item.generated_middle();
    if middle_range.is_empty() {
        return Err(Error::DegenerateItem(format!(
            "item `{}` has no generated frames between the conditioning regions",
            item.id
        )));
    }
    let n = item.generated.len();
    let tail_offset = n - item.n_end();
    let start = item.clip_pair.start().frames();
    let end = item.clip_pair.end().frames();

    let start_path = dtw_align(start, item.generated_head(), ssim_cost)?;
    let end_path = dtw_align(end, item.generated_tail(), ssim_cost)?;

    let all: Vec<Correspondence> = start_path
        .pairs
        .iter()
        .map(|&(r, g)| Correspondence {
            side: Side::Start,
            clip_index: r,
            position: r,
            generated_index: g,
        })
        .chain(end_path.pairs.iter().map(|&(r, g)| Correspondence {
            side: Side::End,
            clip_index: r,
            position: tail_offset + r,
            generated_index: tail_offset + g,
        }))
        .collect();
    let pairs: Vec<Correspondence> = even_indices(all.len(), cfg.k).into_iter().map(|i| all[i].clone()).collect();
    let middle: Vec<usize> = even_indices(middle_range.len(), cfg.z)
        .into_iter()
        .map(|i| middle_range.start + i)
        .collect();

    let floor = cfg.min_distance;
    let terms = pairs
        .par_iter()
        .map(|p| {
            let original = match p.side {
                Side::Start => &start[p.clip_index],
                Side::End => &end[p.clip_index],
            };
            let counterpart = item.generated.frame(p.generated_index);
            middle
                .iter()
                .map(|&m| {
                    let fm = item.generated.frame(m);
                    let d_orig = m.abs_diff(p.position).max(floor) as f64;
                    let d_gen = m.abs_diff(p.generated_index).max(floor) as f64;
                    Ok((ssim(original, fm)? / d_orig - ssim(counterpart, fm)? / d_gen).abs())
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let count = (pairs.len() * middle.len()) as f64;
    let value = terms.iter().flatten().sum::<f64>() / count;
    Ok(ConnectingDistanceReport {
        value,
        start_path,
        end_path,
        pairs,
        middle,
        terms,
    })
}

/// `T_CD`: mean `|SSIM(I, I_M) / d(I_M, I) - SSIM(I_G, I_M) / d(I_M, I_G)|` over
/// sampled correspondences and middle frames.
pub fn connecting_distance(item: &EvaluationItem, cfg: &ConnectingDistanceConfig) -> Result<f64> {
    connecting_distance_detailed(item, cfg).map(|r| r.value)
}
