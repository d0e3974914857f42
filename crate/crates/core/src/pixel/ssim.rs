//! Structural similarity on the luma plane.
//!
//! 11x11 Gaussian window (sigma 1.5), `K1 = 0.01`, `K2 = 0.03`, dynamic range 1.
//! The SSIM map is evaluated only where the window fits entirely inside the
//! frame and then averaged.

use crate::error::{Error, Result};
use crate::media::Frame;

pub const WINDOW: usize = 11;
pub const SIGMA: f64 = 1.5;
pub const K1: f64 = 0.01;
pub const K2: f64 = 0.03;
pub const C1: f64 = K1 * K1;
pub const C2: f64 = K2 * K2;

fn gaussian_kernel() -> [f64; WINDOW] {
    let mut k = [0.0; WINDOW];
    let c = (WINDOW / 2) as f64;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-(d * d) / (2.0 * SIGMA * SIGMA)).exp();
    }
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

pub fn ssim(a: &Frame, b: &Frame) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::dim(format!("ssim of {:?} and {:?} frames", a.shape(), b.shape())));
    }
    let (h, w) = a.shape();
    ssim_plane(a.luma(), b.luma(), h, w)
}

/// SSIM of two row-major planes of size `height * width`.
pub fn ssim_plane(a: &[f64], b: &[f64], height: usize, width: usize) -> Result<f64> {
    if a.len() != height * width || b.len() != height * width {
        return Err(Error::dim("plane length does not match its shape"));
    }
    if height < WINDOW || width < WINDOW {
        return Err(Error::dim(format!(
            "ssim needs at least {WINDOW}x{WINDOW} pixels, got {height}x{width}"
        )));
    }
    let k = gaussian_kernel();
    let ow = width - WINDOW + 1;
    let oh = height - WINDOW + 1;

    // Horizontal pass over the five moment images.
    let mut hpass = vec![[0.0f64; 5]; height * ow];
    for y in 0..height {
        let row = y * width;
        for x in 0..ow {
            let mut acc = [0.0; 5];
            for (i, &kv) in k.iter().enumerate() {
                let pa = a[row + x + i];
                let pb = b[row + x + i];
                acc[0] += kv * pa;
                acc[1] += kv * pb;
                acc[2] += kv * pa * pa;
                acc[3] += kv * pb * pb;
                acc[4] += kv * pa * pb;
            }
            hpass[y * ow + x] = acc;
        }
    }

    let mut total = 0.0;
    for y in 0..oh {
        for x in 0..ow {
            let mut m = [0.0; 5];
            for (i, &kv) in k.iter().enumerate() {
                let src = &hpass[(y + i) * ow + x];
                for (mj, sj) in m.iter_mut().zip(src) {
                    *mj += kv * sj;
                }
            }
            let [mu_a, mu_b, ea2, eb2, eab] = m;
            let var_a = ea2 - mu_a * mu_a;
            let var_b = eb2 - mu_b * mu_b;
            let cov = eab - mu_a * mu_b;
            let num = (2.0 * mu_a * mu_b + C1) * (2.0 * cov + C2);
            let den = (mu_a * mu_a + mu_b * mu_b + C1) * (var_a + var_b + C2);
            total += num / den;
        }
    }
    Ok(total / (oh * ow) as f64)
}
