use std::ops::Range;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::media::color;

pub const CHANNELS: usize = 3;

/// A single RGB frame with samples in `[0, 1]`, stored interleaved row-major.
///
/// Frames are cheap to clone: the pixel buffer is shared and never mutated.
/// The BT.601 luma plane is computed on first use and cached.
#[derive(Clone)]
pub struct Frame(Arc<FrameData>);

struct FrameData {
    height: usize,
    width: usize,
    pixels: Vec<f32>,
    luma: OnceLock<Vec<f64>>,
}

impl Frame {
    pub fn new(height: usize, width: usize, pixels: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::dim(format!("frame must be non-empty, got {height}x{width}")));
        }
        if pixels.len() != height * width * CHANNELS {
            return Err(Error::dim(format!(
                "expected {} samples for a {height}x{width} RGB frame, got {}",
                height * width * CHANNELS,
                pixels.len()
            )));
        }
        if let Some(bad) = pixels.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(Error::dim(format!("pixel value {bad} outside [0, 1]")));
        }
        Ok(Frame(Arc::new(FrameData {
            height,
            width,
            pixels,
            luma: OnceLock::new(),
        })))
    }

    /// Builds a frame by evaluating `f(y, x)` for every pixel. Values are clamped to `[0, 1]`.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> [f32; 3]) -> Self {
        let mut pixels = Vec::with_capacity(height * width * CHANNELS);
        for y in 0..height {
            for x in 0..width {
                let px = f(y, x);
                pixels.extend(px.iter().map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) }));
            }
        }
        Frame::new(height, width, pixels).expect("from_fn produces a valid frame")
    }

    pub fn filled(height: usize, width: usize, rgb: [f32; 3]) -> Self {
        Frame::from_fn(height, width, |_, _| rgb)
    }

    pub fn height(&self) -> usize {
        self.0.height
    }

    pub fn width(&self) -> usize {
        self.0.width
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.0.height, self.0.width)
    }

    pub fn pixels(&self) -> &[f32] {
        &self.0.pixels
    }

    pub fn pixel(&self, y: usize, x: usize) -> [f32; 3] {
        let i = (y * self.0.width + x) * CHANNELS;
        let p = &self.0.pixels[i..i + CHANNELS];
        [p[0], p[1], p[2]]
    }

    /// Row-major luma plane.
    pub fn luma(&self) -> &[f64] {
        self.0.luma.get_or_init(|| {
            self.0
                .pixels
                .chunks_exact(CHANNELS)
                .map(|p| color::luma(p[0] as f64, p[1] as f64, p[2] as f64))
                .collect()
        })
    }

    pub fn ptr_eq(&self, other: &Frame) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl PartialEq for Frame {
    fn eq(&self, other: &Self) -> bool {
        self.ptr_eq(other) || (self.shape() == other.shape() && self.pixels() == other.pixels())
    }
}

impl std::fmt::Debug for Frame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Frame")
            .field("height", &self.0.height)
            .field("width", &self.0.width)
            .finish_non_exhaustive()
    }
}

/// Decoded video: equally shaped frames plus a frame rate.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameSequence {
    frames: Vec<Frame>,
    fps: f64,
    source_id: Option<String>,
}

impl FrameSequence {
    pub fn new(frames: Vec<Frame>, fps: f64) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::EmptyVideo);
        }
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::dim(format!("fps must be positive, got {fps}")));
        }
        let shape = frames[0].shape();
        if let Some((i, f)) = frames.iter().enumerate().find(|(_, f)| f.shape() != shape) {
            return Err(Error::dim(format!(
                "frame {i} has shape {:?}, expected {shape:?}",
                f.shape()
            )));
        }
        Ok(FrameSequence {
            frames,
            fps,
            source_id: None,
        })
    }

    pub fn with_source_id(mut self, id: impl Into<String>) -> Self {
        self.source_id = Some(id.into());
        self
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame(&self, index: usize) -> &Frame {
        &self.frames[index]
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn source_id(&self) -> Option<&str> {
        self.source_id.as_deref()
    }

    /// `(height, width)` shared by every frame.
    pub fn shape(&self) -> (usize, usize) {
        self.frames[0].shape()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.frames.len() as f64 / self.fps
    }

    pub fn slice(&self, range: Range<usize>) -> Result<FrameSequence> {
        if range.start >= range.end || range.end > self.frames.len() {
            return Err(Error::dim(format!(
                "range {range:?} outside a {}-frame sequence",
                self.frames.len()
            )));
        }
        Ok(FrameSequence {
            frames: self.frames[range].to_vec(),
            fps: self.fps,
            source_id: self.source_id.clone(),
        })
    }

    pub fn reversed(&self) -> FrameSequence {
        let mut frames = self.frames.clone();
        frames.reverse();
        FrameSequence {
            frames,
            fps: self.fps,
            source_id: self.source_id.clone(),
        }
    }

    /// Concatenates sequences that share shape and frame rate.
    pub fn concat(parts: &[&FrameSequence]) -> Result<FrameSequence> {
        let first = parts.first().ok_or(Error::EmptyVideo)?;
        if let Some(p) = parts.iter().find(|p| p.fps != first.fps) {
            return Err(Error::dim(format!("fps mismatch: {} vs {}", p.fps, first.fps)));
        }
        let frames = parts.iter().flat_map(|p| p.frames.iter().cloned()).collect();
        FrameSequence::new(frames, first.fps)
    }

    /// Nearest-index resampling to `target_fps`: output frame `t` is input frame
    /// `floor(t * fps / target_fps)`.
    pub fn resample(&self, target_fps: f64) -> Result<FrameSequence> {
        if !(target_fps.is_finite() && target_fps > 0.0) {
            return Err(Error::dim(format!("target fps must be positive, got {target_fps}")));
        }
        if (target_fps - self.fps).abs() < 1e-9 {
            return Ok(self.clone());
        }
        let ratio = self.fps / target_fps;
        let out_len = ((self.frames.len() as f64) / ratio).floor().max(1.0) as usize;
        let frames = (0..out_len)
            .map(|t| {
                let src = ((t as f64) * ratio + 1e-9).floor() as usize;
                self.frames[src.min(self.frames.len() - 1)].clone()
            })
            .collect();
        let mut out = FrameSequence::new(frames, target_fps)?;
        out.source_id = self.source_id.clone();
        Ok(out)
    }
}

/// Start clip `V_S` and end clip `V_E`.
#[derive(Clone, Debug)]
pub struct ClipPair {
    start: FrameSequence,
    end: FrameSequence,
}

impl ClipPair {
    pub fn new(start: FrameSequence, end: FrameSequence) -> Result<Self> {
        if start.shape() != end.shape() {
            return Err(Error::dim(format!(
                "start clip is {:?} but end clip is {:?}",
                start.shape(),
                end.shape()
            )));
        }
        if (start.fps() - end.fps()).abs() > 1e-9 {
            return Err(Error::dim(format!(
                "start clip runs at {} fps but end clip at {} fps",
                start.fps(),
                end.fps()
            )));
        }
        Ok(ClipPair { start, end })
    }

    pub fn start(&self) -> &FrameSequence {
        &self.start
    }

    pub fn end(&self) -> &FrameSequence {
        &self.end
    }
}

/// One benchmark case: the conditioning clips and the generated connecting video.
#[derive(Clone, Debug)]
pub struct EvaluationItem {
    pub id: String,
    pub clip_pair: ClipPair,
    pub generated: FrameSequence,
    pub prompt: Option<String>,
    pub category: String,
    pub subcategory: String,
}

impl EvaluationItem {
    pub fn new(id: impl Into<String>, clip_pair: ClipPair, generated: FrameSequence) -> Result<Self> {
        let start = clip_pair.start();
        if generated.shape() != start.shape() {
            return Err(Error::dim(format!(
                "generated video is {:?} but clips are {:?}",
                generated.shape(),
                start.shape()
            )));
        }
        if (generated.fps() - start.fps()).abs() > 1e-9 {
            return Err(Error::dim(format!(
                "generated video runs at {} fps but clips at {} fps",
                generated.fps(),
                start.fps()
            )));
        }
        let needed = start.len() + clip_pair.end().len();
        if generated.len() < needed {
            return Err(Error::TooFewFrames {
                needed,
                got: generated.len(),
            });
        }
        Ok(EvaluationItem {
            id: id.into(),
            clip_pair,
            generated,
            prompt: None,
            category: String::new(),
            subcategory: String::new(),
        })
    }

    pub fn n_start(&self) -> usize {
        self.clip_pair.start().len()
    }

    pub fn n_end(&self) -> usize {
        self.clip_pair.end().len()
    }

    /// Generated frames at the positions of the start clip.
    pub fn generated_head(&self) -> &[Frame] {
        &self.generated.frames()[..self.n_start()]
    }

    /// Generated frames at the positions of the end clip.
    pub fn generated_tail(&self) -> &[Frame] {
        let n = self.generated.len();
        &self.generated.frames()[n - self.n_end()..]
    }

    /// Generated frames strictly between the two conditioning regions.
    pub fn generated_middle(&self) -> Range<usize> {
        self.n_start()..self.generated.len() - self.n_end()
    }

    /// The item with time reversed: the reversed end clip becomes the start clip.
    pub fn time_reversed(&self) -> Result<EvaluationItem> {
        let pair = ClipPair::new(self.clip_pair.end().reversed(), self.clip_pair.start().reversed())?;
        let mut item = EvaluationItem::new(self.id.clone(), pair, self.generated.reversed())?;
        item.prompt = self.prompt.clone();
        item.category = self.category.clone();
        item.subcategory = self.subcategory.clone();
        Ok(item)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(n: usize, fps: f64) -> FrameSequence {
        let frames = (0..n).map(|i| Frame::filled(4, 4, [i as f32 / n as f32; 3])).collect();
        FrameSequence::new(frames, fps).unwrap()
    }

    #[test]
    fn rejects_out_of_range_pixels() {
        assert!(Frame::new(1, 1, vec![0.0, 1.5, 0.0]).is_err());
        assert!(Frame::new(1, 1, vec![0.0, f32::NAN, 0.0]).is_err());
        assert!(Frame::new(1, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn rejects_mixed_shapes_and_empty() {
        let frames = vec![Frame::filled(2, 2, [0.0; 3]), Frame::filled(2, 3, [0.0; 3])];
        assert!(FrameSequence::new(frames, 24.0).is_err());
        assert!(matches!(FrameSequence::new(vec![], 24.0), Err(Error::EmptyVideo)));
    }

    #[test]
    fn resample_halves_by_nearest_index() {
        let v = seq(30, 24.0);
        let r = v.resample(12.0).unwrap();
        assert_eq!(r.len(), 15);
        assert_eq!(r.fps(), 12.0);
        for (t, f) in r.frames().iter().enumerate() {
            // oracle: floor(t * 24 / 12)
            assert!(f.ptr_eq(v.frame(t * 24 / 12)));
        }
        assert_eq!(v.resample(24.0).unwrap().len(), 30);
    }

    #[test]
    fn item_requires_room_for_both_clips() {
        let pair = ClipPair::new(seq(3, 24.0), seq(3, 24.0)).unwrap();
        assert!(matches!(
            EvaluationItem::new("x", pair.clone(), seq(5, 24.0)),
            Err(Error::TooFewFrames { needed: 6, got: 5 })
        ));
        let item = EvaluationItem::new("x", pair, seq(10, 24.0)).unwrap();
        assert_eq!(item.generated_middle(), 3..7);
        assert_eq!(item.generated_tail().len(), 3);
    }

    #[test]
    fn clip_pair_rejects_fps_mismatch() {
        assert!(ClipPair::new(seq(3, 24.0), seq(3, 25.0)).is_err());
    }
}
