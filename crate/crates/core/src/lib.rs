pub mod alignment;
pub mod cli;
pub mod conditioning;
pub mod dataset;
pub mod error;
pub mod features;
pub mod media;
pub mod pixel;
pub mod scoring;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
