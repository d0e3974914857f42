//! Frames, colour conversion, decoding and the manifest data model.

pub mod color;
pub mod decode;
pub mod frame;
pub mod manifest;

pub use color::{hue_distance, rgb_to_hsv, rgb_to_yuv, Planes};
pub use decode::{decode_video, write_y4m};
pub use frame::{ClipPair, EvaluationItem, Frame, FrameSequence};
pub use manifest::{load_manifest, save_manifest, FrameWindow, ManifestEntry};
