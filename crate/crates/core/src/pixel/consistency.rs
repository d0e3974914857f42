use crate::error::Result;
use crate::media::EvaluationItem;
use crate::pixel::ssim::ssim;

/// `C_P`: mean SSIM between each conditioning frame and the generated frame at the
/// same position, over the `N_s` leading and `N_e` trailing positions.
///
/// Raw SSIM may be negative; clamping happens at aggregation.
pub fn pixel_consistency(item: &EvaluationItem) -> Result<f64> {
    let start = item.clip_pair.start().frames().iter().zip(item.generated_head());
    let end = item.clip_pair.end().frames().iter().zip(item.generated_tail());
    let mut sum = 0.0;
    let mut n = 0usize;
    for (orig, gen) in start.chain(end) {
        sum += ssim(orig, gen)?;
        n += 1;
    }
    Ok(sum / n as f64)
}
