//! Pixel-level metrics: SSIM, pixel consistency, block flow, flicker and periodicity.

pub mod consistency;
pub mod flicker;
pub mod flow;
pub mod period;
pub mod ssim;

pub use consistency::pixel_consistency;
pub use flicker::{flicker_severity, FlickerConfig};
pub use flow::{block_optical_flow, optical_flow_error, FlowField, FlowParams};
pub use period::{find_peaks, periodicity_detect, PeriodParams, PeriodReport};
pub use ssim::ssim;
