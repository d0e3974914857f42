//! Exhaustive block-matching motion estimation and the optical flow error `C_OF`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::media::{EvaluationItem, Frame};

pub const DEFAULT_BLOCK_SIZE: usize = 16;
pub const DEFAULT_WINDOW: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowParams {
    pub block_size: usize,
    pub window: usize,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            block_size: DEFAULT_BLOCK_SIZE,
            window: DEFAULT_WINDOW,
        }
    }
}

/// Per-block integer displacement `(u, v)` = (horizontal, vertical).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowField {
    pub vectors: Vec<(i32, i32)>,
    pub blocks_y: usize,
    pub blocks_x: usize,
    pub block_size: usize,
    pub window: usize,
}

impl FlowField {
    pub fn at(&self, by: usize, bx: usize) -> (i32, i32) {
        self.vectors[by * self.blocks_x + bx]
    }

    /// Mean Manhattan distance between corresponding block vectors.
    pub fn mean_manhattan(&self, other: &FlowField) -> Result<f64> {
        if (self.blocks_y, self.blocks_x) != (other.blocks_y, other.blocks_x) {
            return Err(Error::dim("flow fields have different block grids"));
        }
        let sum: i64 = self
            .vectors
            .iter()
            .zip(&other.vectors)
            .map(|(a, b)| ((a.0 - b.0).abs() + (a.1 - b.1).abs()) as i64)
            .sum();
        Ok(sum as f64 / self.vectors.len() as f64)
    }
}

/// Candidate order: lower cost, then smaller `|u| + |v|`, then lexicographic `(u, v)`.
fn better(cost: f64, uv: (i32, i32), best_cost: f64, best: (i32, i32)) -> bool {
    if cost != best_cost {
        return cost < best_cost;
    }
    let m = uv.0.abs() + uv.1.abs();
    let bm = best.0.abs() + best.1.abs();
    if m != bm {
        return m < bm;
    }
    uv < best
}

/// For every block of `a`, finds the displacement within `±window` whose block in `b`
/// minimizes the sum of absolute luma differences. Candidates must lie inside `b`.
/// Dimensions not divisible by `block_size` are cropped symmetrically.
pub fn block_optical_flow(a: &Frame, b: &Frame, block_size: usize, window: usize) -> Result<FlowField> {
    if a.shape() != b.shape() {
        return Err(Error::dim(format!("flow between {:?} and {:?} frames", a.shape(), b.shape())));
    }
    if block_size == 0 {
        return Err(Error::dim("block size must be positive"));
    }
    let (h, w) = a.shape();
    if h < block_size || w < block_size {
        return Err(Error::dim(format!("{h}x{w} frame is smaller than one {block_size}px block")));
    }
    let blocks_y = h / block_size;
    let blocks_x = w / block_size;
    let oy = (h - blocks_y * block_size) / 2;
    let ox = (w - blocks_x * block_size) / 2;
    let la = a.luma();
    let lb = b.luma();
    let win = window as i64;

    let mut vectors = Vec::with_capacity(blocks_y * blocks_x);
    for by in 0..blocks_y {
        for bx in 0..blocks_x {
            let y0 = (oy + by * block_size) as i64;
            let x0 = (ox + bx * block_size) as i64;
            let mut best = (0, 0);
            let mut best_cost = f64::INFINITY;
            for v in -win..=win {
                let ty = y0 + v;
                if ty < 0 || ty + block_size as i64 > h as i64 {
                    continue;
                }
                for u in -win..=win {
                    let tx = x0 + u;
                    if tx < 0 || tx + block_size as i64 > w as i64 {
                        continue;
                    }
                    let uv = (u as i32, v as i32);
                    let cost = sad(la, lb, w, (y0 as usize, x0 as usize), (ty as usize, tx as usize), block_size, best_cost);
                    if better(cost, uv, best_cost, best) {
                        best_cost = cost;
                        best = uv;
                    }
                }
            }
            vectors.push(best);
        }
    }
    Ok(FlowField {
        vectors,
        blocks_y,
        blocks_x,
        block_size,
        window,
    })
}

// Early exit once the partial sum strictly exceeds `bound`; the returned value is then
// larger than `bound`, which is all the caller needs.
fn sad(
    la: &[f64],
    lb: &[f64],
    width: usize,
    (ay, ax): (usize, usize),
    (by, bx): (usize, usize),
    size: usize,
    bound: f64,
) -> f64 {
    let mut acc = 0.0;
    for r in 0..size {
        let ra = &la[(ay + r) * width + ax..][..size];
        let rb = &lb[(by + r) * width + bx..][..size];
        acc += ra.iter().zip(rb).map(|(p, q)| (p - q).abs()).sum::<f64>();
        if acc > bound {
            return acc;
        }
    }
    acc
}

/// `C_OF`: mean block Manhattan distance between original and generated flow over
/// consecutive pairs inside each conditioning window, divided by `2 * window`.
///
/// Pairs never cross from the start window into the end window.
pub fn optical_flow_error(item: &EvaluationItem, params: FlowParams) -> Result<f64> {
    let sides = [
        ("start", item.clip_pair.start().frames(), item.generated_head()),
        ("end", item.clip_pair.end().frames(), item.generated_tail()),
    ];
    let mut total = 0.0;
    let mut pairs = 0usize;
    for (name, orig, gen) in sides {
        if orig.len() < 2 {
            return Err(Error::DegenerateWindow(format!(
                "{name} window has {} frame(s); optical flow needs 2",
                orig.len()
            )));
        }
        for t in 0..orig.len() - 1 {
            let fo = block_optical_flow(&orig[t], &orig[t + 1], params.block_size, params.window)?;
            let fg = block_optical_flow(&gen[t], &gen[t + 1], params.block_size, params.window)?;
            total += fo.mean_manhattan(&fg)?;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64 / (2 * params.window) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use proptest::prelude::*;

    #[test]
    fn static_pair_has_zero_flow() {
        let f = synth::noise_frame(48, 48, 1);
        let flow = block_optical_flow(&f, &f, 16, 16).unwrap();
        assert!(flow.vectors.iter().all(|&v| v == (0, 0)));
        assert_eq!((flow.blocks_y, flow.blocks_x), (3, 3));
    }

    #[test]
    fn translation_recovered_on_interior_blocks() {
        let a = synth::noise_frame(64, 64, 9);
        let b = synth::translate_wrap(&a, 3, 4);
        let flow = block_optical_flow(&a, &b, 16, 16).unwrap();
        for by in 0..3 {
            for bx in 0..3 {
                assert_eq!(flow.at(by, bx), (3, 4), "block ({by},{bx})");
            }
        }
        assert!(flow.vectors.iter().all(|&(u, v)| u.abs() <= 16 && v.abs() <= 16));
    }

    #[test]
    fn tie_break_prefers_short_then_lexicographic() {
        assert!(better(1.0, (0, 1), 1.0, (1, 1)));
        assert!(better(1.0, (-1, 0), 1.0, (0, 1)));
        assert!(better(1.0, (-1, 0), 1.0, (1, 0)));
        assert!(!better(2.0, (0, 0), 1.0, (5, 5)));
        // flat frame: every candidate ties, zero displacement wins
        let f = Frame::filled(32, 32, [0.4; 3]);
        let flow = block_optical_flow(&f, &f, 16, 16).unwrap();
        assert!(flow.vectors.iter().all(|&v| v == (0, 0)));
    }

    #[test]
    fn undersized_frame_errors() {
        let f = Frame::filled(8, 32, [0.4; 3]);
        assert!(matches!(block_optical_flow(&f, &f, 16, 16), Err(Error::Dimension(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn vectors_respect_window(seed in 0u64..500, window in 1usize..6) {
            let a = synth::noise_frame(32, 32, seed);
            let b = synth::noise_frame(32, 32, seed + 1);
            let flow = block_optical_flow(&a, &b, 8, window).unwrap();
            let w = window as i32;
            prop_assert!(flow.vectors.iter().all(|&(u, v)| u.abs() <= w && v.abs() <= w));
        }
    }
}
