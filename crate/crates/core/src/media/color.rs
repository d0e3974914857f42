//! Colour-space conversions on normalized RGB.
//!
//! YUV uses the full-range BT.601 (JFIF) matrix with chroma centred at 0.5.
//! HSV uses the hexcone model with every channel scaled to `[0, 1]`; hue is
//! cyclic with period 1 and achromatic pixels get hue 0.

use crate::media::frame::Frame;

pub const KR: f64 = 0.299;
pub const KG: f64 = 0.587;
pub const KB: f64 = 0.114;

#[inline]
pub fn luma(r: f64, g: f64, b: f64) -> f64 {
    // same as KR r + KG g + KB b, but exact for grays
    g + KR * (r - g) + KB * (b - g)
}

#[inline]
pub fn rgb_to_yuv_pixel(r: f64, g: f64, b: f64) -> [f64; 3] {
    let y = luma(r, g, b);
    let u = 0.5 + (b - y) / (2.0 * (1.0 - KB));
    let v = 0.5 + (r - y) / (2.0 * (1.0 - KR));
    [y, u.clamp(0.0, 1.0), v.clamp(0.0, 1.0)]
}

#[inline]
pub fn yuv_to_rgb_pixel(y: f64, u: f64, v: f64) -> [f64; 3] {
    let cb = u - 0.5;
    let cr = v - 0.5;
    let r = y + 2.0 * (1.0 - KR) * cr;
    let b = y + 2.0 * (1.0 - KB) * cb;
    let g = (y - KR * r - KB * b) / KG;
    [r.clamp(0.0, 1.0), g.clamp(0.0, 1.0), b.clamp(0.0, 1.0)]
}

#[inline]
pub fn rgb_to_hsv_pixel(r: f64, g: f64, b: f64) -> [f64; 3] {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    if delta <= 0.0 {
        return [0.0, s, v];
    }
    let sector = if max == r {
        ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    let h = (sector / 6.0).rem_euclid(1.0);
    [h, s, v]
}

/// Distance between two hues on the unit circle; lies in `[0, 0.5]`.
#[inline]
pub fn hue_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Three planes of a converted frame, each row-major `height * width`.
#[derive(Clone, Debug, PartialEq)]
pub struct Planes {
    pub height: usize,
    pub width: usize,
    pub planes: [Vec<f64>; 3],
}

impl Planes {
    pub fn at(&self, plane: usize, y: usize, x: usize) -> f64 {
        self.planes[plane][y * self.width + x]
    }
}

fn convert(frame: &Frame, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Planes {
    let n = frame.height() * frame.width();
    let mut planes = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    for p in frame.pixels().chunks_exact(3) {
        let out = f(p[0] as f64, p[1] as f64, p[2] as f64);
        for (plane, v) in planes.iter_mut().zip(out) {
            plane.push(v);
        }
    }
    Planes {
        height: frame.height(),
        width: frame.width(),
        planes,
    }
}

pub fn rgb_to_yuv(frame: &Frame) -> Planes {
    convert(frame, rgb_to_yuv_pixel)
}

pub fn rgb_to_hsv(frame: &Frame) -> Planes {
    convert(frame, rgb_to_hsv_pixel)
}
