//! Video decoding boundary.
//!
//! YUV4MPEG2 (`.y4m`) is decoded natively. Any other container is piped
//! through an `ffmpeg` binary on `PATH` (or `VCBENCH_FFMPEG`) as a y4m stream.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::process::{Command, Stdio};

use crate::error::{Error, Result};
use crate::media::color::{rgb_to_yuv_pixel, yuv_to_rgb_pixel};
use crate::media::frame::{Frame, FrameSequence};

pub const FFMPEG_ENV: &str = "VCBENCH_FFMPEG";

fn decode_err(path: &Path, message: impl std::fmt::Display) -> Error {
    Error::Decode {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

/// Decodes a video into normalized RGB frames, optionally resampled to `target_fps`
/// by nearest-index selection.
pub fn decode_video(path: &Path, target_fps: Option<f64>) -> Result<FrameSequence> {
    if !path.is_file() {
        return Err(decode_err(path, "no such file"));
    }
    let is_y4m = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("y4m"));
    let seq = if is_y4m {
        let file = File::open(path).map_err(|e| decode_err(path, e))?;
        read_y4m(BufReader::new(file), path)?
    } else {
        decode_with_ffmpeg(path)?
    };
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let seq = seq.with_source_id(id);
    match target_fps {
        Some(fps) => seq.resample(fps),
        None => Ok(seq),
    }
}

fn decode_with_ffmpeg(path: &Path) -> Result<FrameSequence> {
    let bin = std::env::var(FFMPEG_ENV).unwrap_or_else(|_| "ffmpeg".to_string());
    let mut child = Command::new(&bin)
        .args(["-v", "error", "-nostdin", "-i"])
        .arg(path)
        .args(["-f", "yuv4mpegpipe", "-pix_fmt", "yuv444p", "-strict", "-1", "-"])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| decode_err(path, format!("cannot run `{bin}` for this container: {e}")))?;
    let stdout = child.stdout.take().expect("piped stdout");
    let decoded = read_y4m(BufReader::new(stdout), path);
    let output = child.wait_with_output().map_err(|e| decode_err(path, e))?;
    if !output.status.success() {
        return Err(decode_err(
            path,
            String::from_utf8_lossy(&output.stderr).trim().to_string(),
        ));
    }
    decoded
}

/// Reads a YUV4MPEG2 stream. Honours `XCOLORRANGE=FULL`; otherwise samples are
/// treated as studio range. Chroma is upsampled by replication.
pub fn read_y4m<R: Read>(reader: R, path: &Path) -> Result<FrameSequence> {
    let mut dec = y4m::Decoder::new(reader).map_err(|e| decode_err(path, e))?;
    let width = dec.get_width();
    let height = dec.get_height();
    let rate = dec.get_framerate();
    if rate.num == 0 || rate.den == 0 {
        return Err(decode_err(path, "stream declares no frame rate"));
    }
    let fps = rate.num as f64 / rate.den as f64;
    let colorspace = dec.get_colorspace();
    let depth = dec.get_bit_depth();
    let bytes = dec.get_bytes_per_sample();
    let full_range = String::from_utf8_lossy(dec.get_raw_params()).contains("XCOLORRANGE=FULL");
    let (cw, ch) = chroma_dims(colorspace, width, height);
    let max = ((1u32 << depth) - 1) as f64;
    let scale = (1u32 << (depth - 8)) as f64;

    let sample = |plane: &[u8], i: usize| -> f64 {
        if bytes == 1 {
            plane[i] as f64
        } else {
            u16::from_le_bytes([plane[2 * i], plane[2 * i + 1]]) as f64
        }
    };
    let norm_luma = |v: f64| {
        if full_range {
            v / max
        } else {
            (v / scale - 16.0) / 219.0
        }
    };
    let norm_chroma = |v: f64| {
        if full_range {
            0.5 + (v - 128.0 * scale) / max
        } else {
            0.5 + (v / scale - 128.0) / 224.0
        }
    };

    let mut frames = Vec::new();
    loop {
        let raw = match dec.read_frame() {
            Ok(f) => f,
            Err(y4m::Error::EOF) => break,
            Err(e) => return Err(decode_err(path, e)),
        };
        let (yp, up, vp) = (raw.get_y_plane(), raw.get_u_plane(), raw.get_v_plane());
        let mut pixels = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                let luma = norm_luma(sample(yp, y * width + x)).clamp(0.0, 1.0);
                let rgb = if cw == 0 {
                    [luma; 3]
                } else {
                    let ci = (y * ch / height) * cw + (x * cw / width);
                    let u = norm_chroma(sample(up, ci));
                    let v = norm_chroma(sample(vp, ci));
                    yuv_to_rgb_pixel(luma, u, v)
                };
                pixels.extend(rgb.iter().map(|&c| c as f32));
            }
        }
        frames.push(Frame::new(height, width, pixels)?);
    }
    if frames.is_empty() {
        return Err(Error::EmptyVideo);
    }
    FrameSequence::new(frames, fps)
}

fn chroma_dims(cs: y4m::Colorspace, width: usize, height: usize) -> (usize, usize) {
    use y4m::Colorspace::*;
    match cs {
        Cmono | Cmono12 => (0, 0),
        C422 | C422p10 | C422p12 => (width.div_ceil(2), height),
        C444 | C444p10 | C444p12 => (width, height),
        _ => (width.div_ceil(2), height.div_ceil(2)),
    }
}

fn fps_ratio(fps: f64) -> y4m::Ratio {
    let rounded = fps.round();
    if (fps - rounded).abs() < 1e-9 {
        y4m::Ratio::new(rounded as usize, 1)
    } else {
        y4m::Ratio::new((fps * 1001.0).round() as usize, 1001)
    }
}

/// Writes 8-bit full-range 4:4:4 y4m. Used to materialize synthetic fixtures.
pub fn write_y4m(seq: &FrameSequence, path: &Path) -> Result<()> {
    let (height, width) = seq.shape();
    let mut file = BufWriter::new(File::create(path)?);
    let ext = y4m::VendorExtensionString::new(b"XCOLORRANGE=FULL".to_vec())
        .map_err(|e| decode_err(path, e))?;
    let mut enc = y4m::encode(width, height, fps_ratio(seq.fps()))
        .with_colorspace(y4m::Colorspace::C444)
        .append_vendor_extension(ext)
        .write_header(&mut file)
        .map_err(|e| decode_err(path, e))?;
    let n = width * height;
    let (mut yp, mut up, mut vp) = (vec![0u8; n], vec![0u8; n], vec![0u8; n]);
    let q = |v: f64| (v * 255.0).round().clamp(0.0, 255.0) as u8;
    let qc = |v: f64| ((v - 0.5) * 255.0 + 128.0).round().clamp(0.0, 255.0) as u8;
    for frame in seq.frames() {
        for (i, p) in frame.pixels().chunks_exact(3).enumerate() {
            let [y, u, v] = rgb_to_yuv_pixel(p[0] as f64, p[1] as f64, p[2] as f64);
            yp[i] = q(y);
            up[i] = qc(u);
            vp[i] = qc(v);
        }
        enc.write_frame(&y4m::Frame::new([&yp, &up, &vp], None))
            .map_err(|e| decode_err(path, e))?;
    }
    drop(enc);
    file.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(n: usize, fps: f64) -> FrameSequence {
        let frames = (0..n)
            .map(|t| Frame::from_fn(8, 8, |y, x| [t as f32 / n as f32, y as f32 / 8.0, x as f32 / 8.0]))
            .collect();
        FrameSequence::new(frames, fps).unwrap()
    }

    #[test]
    fn y4m_round_trip_keeps_count_rate_and_range() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clip.y4m");
        write_y4m(&ramp(30, 24.0), &path).unwrap();
        let back = decode_video(&path, None).unwrap();
        assert_eq!(back.len(), 30);
        assert_eq!(back.fps(), 24.0);
        assert_eq!(back.shape(), (8, 8));
        assert_eq!(back.source_id(), Some("clip"));
        assert!(back.frames().iter().all(|f| f.pixels().iter().all(|v| (0.0..=1.0).contains(v))));
        let orig = ramp(30, 24.0);
        let err = orig
            .frame(5)
            .pixels()
            .iter()
            .zip(back.frame(5).pixels())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f32, f32::max);
        assert!(err < 0.02, "quantization error {err}");
    }

    #[test]
    fn resamples_on_decode() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clip.y4m");
        write_y4m(&ramp(30, 24.0), &path).unwrap();
        let half = decode_video(&path, Some(12.0)).unwrap();
        assert_eq!(half.len(), 15);
        assert_eq!(half.fps(), 12.0);
    }

    #[test]
    fn missing_file_is_decode_error() {
        let err = decode_video(Path::new("/definitely/not/here.y4m"), None).unwrap_err();
        assert!(matches!(err, Error::Decode { .. }));
    }

    #[test]
    fn header_only_stream_is_empty_video() {
        let data = b"YUV4MPEG2 W4 H4 F24:1 C444\n".to_vec();
        let err = read_y4m(&data[..], Path::new("mem.y4m")).unwrap_err();
        assert!(matches!(err, Error::EmptyVideo));
    }

    #[test]
    fn studio_range_gray_decodes_to_mid_gray() {
        let mut data = b"YUV4MPEG2 W2 H2 F25:1 C420jpeg\nFRAME\n".to_vec();
        data.extend([126u8; 4]); // (126 - 16) / 219 ~ 0.502
        data.extend([128u8, 128u8]);
        let seq = read_y4m(&data[..], Path::new("mem.y4m")).unwrap();
        let p = seq.frame(0).pixel(1, 1);
        for c in p {
            assert!((c - 110.0 / 219.0).abs() < 1e-6);
        }
    }
}
