//! Deterministic synthetic videos for tests, fixtures and smoke runs.
//!
//! Every generator is a pure function of its arguments (seeded ChaCha8).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::media::{ClipPair, EvaluationItem, Frame, FrameSequence};

pub const FPS: f64 = 24.0;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn seq(frames: Vec<Frame>) -> FrameSequence {
    FrameSequence::new(frames, FPS).expect("synthetic frames share one shape")
}

/// Uniform RGB noise.
pub fn noise_frame(height: usize, width: usize, seed: u64) -> Frame {
    let mut r = rng(seed);
    Frame::from_fn(height, width, |_, _| [r.gen(), r.gen(), r.gen()])
}

pub fn noise_sequence(height: usize, width: usize, n: usize, seed: u64) -> FrameSequence {
    seq((0..n as u64).map(|t| noise_frame(height, width, seed.wrapping_mul(1_000_003).wrapping_add(t))).collect())
}

/// Content moved by `(dx, dy)` with wrap-around: `out(x, y) = src(x - dx, y - dy)`.
pub fn translate_wrap(src: &Frame, dx: i64, dy: i64) -> Frame {
    let (h, w) = src.shape();
    Frame::from_fn(h, w, |y, x| {
        let sy = (y as i64 - dy).rem_euclid(h as i64) as usize;
        let sx = (x as i64 - dx).rem_euclid(w as i64) as usize;
        src.pixel(sy, sx)
    })
}

/// Random texture that repeats every `period` pixels along both axes.
pub fn periodic_texture(height: usize, width: usize, period: usize, seed: u64) -> Frame {
    let tile = noise_frame(period, period, seed);
    Frame::from_fn(height, width, |y, x| tile.pixel(y % period, x % period))
}

/// Smooth value noise: random lattice every `cell` pixels, bilinearly interpolated.
/// Sampled at `(y + oy, x + ox)` so a sequence of offsets pans across one canvas.
pub struct SmoothCanvas {
    cell: usize,
    lattice_w: usize,
    values: Vec<[f32; 3]>,
}

impl SmoothCanvas {
    pub fn new(height: usize, width: usize, cell: usize, seed: u64) -> Self {
        let lattice_h = height / cell + 2;
        let lattice_w = width / cell + 2;
        let mut r = rng(seed);
        let values = (0..lattice_h * lattice_w)
            .map(|_| [r.gen_range(0.1..0.9), r.gen_range(0.1..0.9), r.gen_range(0.1..0.9)])
            .collect();
        SmoothCanvas { cell, lattice_w, values }
    }

    pub fn sample(&self, y: usize, x: usize) -> [f32; 3] {
        let c = self.cell as f32;
        let (gy, gx) = (y / self.cell, x / self.cell);
        let (fy, fx) = ((y % self.cell) as f32 / c, (x % self.cell) as f32 / c);
        let at = |yy: usize, xx: usize| self.values[yy * self.lattice_w + xx];
        let (a, b, cc, d) = (at(gy, gx), at(gy, gx + 1), at(gy + 1, gx), at(gy + 1, gx + 1));
        let mut out = [0.0; 3];
        for k in 0..3 {
            let top = a[k] * (1.0 - fx) + b[k] * fx;
            let bottom = cc[k] * (1.0 - fx) + d[k] * fx;
            out[k] = top * (1.0 - fy) + bottom * fy;
        }
        out
    }

    pub fn view(&self, height: usize, width: usize, oy: usize, ox: usize) -> Frame {
        Frame::from_fn(height, width, |y, x| self.sample(y + oy, x + ox))
    }
}

/// Camera panning right by `speed` pixels per frame across smooth content.
pub fn pan(height: usize, width: usize, n: usize, speed: usize, seed: u64) -> FrameSequence {
    let canvas = SmoothCanvas::new(height + 1, width + speed * n + 1, 4, seed);
    seq((0..n).map(|t| canvas.view(height, width, 0, t * speed)).collect())
}

/// Camera swinging left and right: offset `amplitude (1 - cos(2 pi t / period)) / 2`.
pub fn swing(height: usize, width: usize, n: usize, period: f64, amplitude: usize, seed: u64) -> FrameSequence {
    let canvas = SmoothCanvas::new(height + 1, width + amplitude + 1, 4, seed);
    seq((0..n)
        .map(|t| {
            let phase = 2.0 * std::f64::consts::PI * t as f64 / period;
            let ox = (amplitude as f64 * (1.0 - phase.cos()) / 2.0).round() as usize;
            canvas.view(height, width, 0, ox)
        })
        .collect())
}

/// Every frame black or white, alternating.
pub fn black_white_alternating(height: usize, width: usize, n: usize) -> FrameSequence {
    seq((0..n).map(|t| Frame::filled(height, width, [(t % 2) as f32; 3])).collect())
}

/// Left half alternates black/white every frame; right half stays mid-gray.
pub fn half_flashing(height: usize, width: usize, n: usize) -> FrameSequence {
    seq((0..n)
        .map(|t| {
            Frame::from_fn(height, width, |_, x| {
                if x < width / 2 {
                    [(t % 2) as f32; 3]
                } else {
                    [0.5; 3]
                }
            })
        })
        .collect())
}

/// Noise frames with random global brightness jumps.
pub fn noisy_flicker(height: usize, width: usize, n: usize, seed: u64) -> FrameSequence {
    let base = noise_frame(height, width, seed);
    let mut r = rng(seed ^ 0xF11C);
    seq((0..n)
        .map(|_| {
            let gain: f32 = r.gen_range(0.3..1.0);
            let shift: f32 = r.gen_range(-0.2..0.2);
            Frame::from_fn(height, width, |y, x| base.pixel(y, x).map(|v| v * gain + shift))
        })
        .collect())
}

/// Textured frame whose brightness oscillates as `cos(2 pi t / period)`.
pub fn oscillating(height: usize, width: usize, n: usize, period: f64, seed: u64) -> FrameSequence {
    let base = noise_frame(height, width, seed);
    seq((0..n)
        .map(|t| {
            let gain = 0.55 + 0.4 * (2.0 * std::f64::consts::PI * t as f64 / period).cos();
            Frame::from_fn(height, width, |y, x| base.pixel(y, x).map(|v| (0.1 + 0.9 * v) * gain as f32))
        })
        .collect())
}

/// Textured frame fading linearly toward black.
pub fn linear_fade(height: usize, width: usize, n: usize, seed: u64) -> FrameSequence {
    let base = noise_frame(height, width, seed);
    seq((0..n)
        .map(|t| {
            let gain = 1.0 - 0.8 * t as f32 / (n.max(2) - 1) as f32;
            Frame::from_fn(height, width, |y, x| base.pixel(y, x).map(|v| v * gain))
        })
        .collect())
}

/// Solid-colour segments joined back to back.
pub fn splice(height: usize, width: usize, segments: &[([f32; 3], usize)]) -> FrameSequence {
    seq(segments
        .iter()
        .flat_map(|&(rgb, len)| std::iter::repeat_n(Frame::filled(height, width, rgb), len))
        .collect())
}

/// Panning content cut into start clip, middle and end clip; the generated video is
/// the original itself.
pub fn self_connected_item(
    id: &str,
    height: usize,
    width: usize,
    n_start: usize,
    n_middle: usize,
    n_end: usize,
    seed: u64,
) -> EvaluationItem {
    let original = pan(height, width, n_start + n_middle + n_end, 2, seed);
    let total = original.len();
    let start = original.slice(0..n_start).expect("start fits");
    let end = original.slice(total - n_end..total).expect("end fits");
    EvaluationItem::new(id, ClipPair::new(start, end).expect("same shape"), original).expect("valid item")
}

/// Like [`self_connected_item`] but with the middle replaced by unrelated noise.
pub fn noisy_middle_item(
    id: &str,
    height: usize,
    width: usize,
    n_start: usize,
    n_middle: usize,
    n_end: usize,
    seed: u64,
) -> EvaluationItem {
    let base = self_connected_item(id, height, width, n_start, n_middle, n_end, seed);
    let middle = noise_sequence(height, width, n_middle, seed ^ 0xBEEF);
    let generated =
        FrameSequence::concat(&[base.clip_pair.start(), &middle, base.clip_pair.end()]).expect("same shape");
    EvaluationItem::new(id, base.clip_pair, generated).expect("valid item")
}
