//! Spherical interpolation and latent-position scheduling for boundary conditioning.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this angle (radians) `slerp` interpolates linearly.
pub const SMALL_ANGLE: f64 = 1e-6;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Spherical linear interpolation from `u` (`alpha = 0`) to `v` (`alpha = 1`).
///
/// `slerp(u, v, a)` and `slerp(v, u, 1 - a)` return identical bits.
pub fn slerp(u: &[f64], v: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if u.len() != v.len() {
        return Err(Error::dim(format!("slerp: dimensions {} and {} differ", u.len(), v.len())));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Config(format!("slerp: alpha {alpha} outside [0, 1]")));
    }
    if u.iter().chain(v).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("slerp input".into()));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::UndefinedDirection);
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let omega = (dot / (nu * nv)).clamp(-1.0, 1.0).acos();
    if std::f64::consts::PI - omega < SMALL_ANGLE {
        // antipodal: every great arc is equally short
        return Err(Error::UndefinedDirection);
    }

    // Both weights come from the larger of (alpha, 1 - alpha), for which the
    // complement is exact; this makes the swap identity hold bit for bit.
    let (wu, wv) = if alpha <= 0.5 {
        let b = 1.0 - alpha;
        (b, 1.0 - b)
    } else {
        (1.0 - alpha, alpha)
    };
    let (cu, cv) = if omega < SMALL_ANGLE {
        (wu, wv)
    } else {
        let s = omega.sin();
        ((wu * omega).sin() / s, (wv * omega).sin() / s)
    };
    Ok(u.iter().zip(v).map(|(a, b)| cu * a + cv * b).collect())
}

/// Which latent positions carry the clips and which are denoised.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatentSchedule {
    pub total_latent_len: usize,
    pub conditioned_head: usize,
    pub conditioned_tail: usize,
    pub noise_indices: Vec<usize>,
}

impl LatentSchedule {
    pub fn head_indices(&self) -> std::ops::Range<usize> {
        0..self.conditioned_head
    }

    pub fn tail_indices(&self) -> std::ops::Range<usize> {
        self.total_latent_len - self.conditioned_tail..self.total_latent_len
    }
}

/// Latent lengths are `ceil(frames / compression)`. Fails when the rounded-up
/// clips no longer fit.
pub fn latent_schedule(n_start: usize, n_end: usize, n_total: usize, compression: usize) -> Result<LatentSchedule> {
    if compression == 0 {
        return Err(Error::Config("temporal compression must be >= 1".into()));
    }
    if n_start + n_end > n_total {
        return Err(Error::Config(format!(
            "clips of {n_start} + {n_end} frames do not fit in {n_total} frames"
        )));
    }
    let total = n_total.div_ceil(compression);
    let head = n_start.div_ceil(compression);
    let tail = n_end.div_ceil(compression);
    if head + tail > total {
        return Err(Error::InfeasibleSchedule {
            head,
            tail,
            total,
            rounding_loss: head + tail - (n_start + n_end).div_ceil(compression),
        });
    }
    Ok(LatentSchedule {
        total_latent_len: total,
        conditioned_head: head,
        conditioned_tail: tail,
        noise_indices: (head..total - tail).collect(),
    })
}
