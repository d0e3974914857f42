//! C interface to the vcbench library.
//!
//! Every function returns a [`VcbStatus`]. On failure a message is kept per thread
//! and can be read with [`vcb_last_error_message`]. Handles are opaque and must be
//! released with their `_free` function. Output parameters are written only on
//! success.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, c_int, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;

use vcbench::alignment::ConnectingDistanceConfig;
use vcbench::conditioning;
use vcbench::features::{BackendNames, BackendRegistry, Backends, FrameEmbedder};
use vcbench::media::{decode_video, ClipPair, EvaluationItem, Frame, FrameSequence};
use vcbench::pixel::{FlickerConfig, FlowParams};
use vcbench::scoring::{self, EvalConfig, Metric, MetricVector, ScoreReport};
use vcbench::stats::{self, RaterMatrix};
use vcbench::Error;

/// Result of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VcbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    Degenerate = 4,
    Decode = 5,
    Io = 6,
    Backend = 7,
    Panic = 8,
}

impl From<&Error> for VcbStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Decode { .. } => VcbStatus::Decode,
            Error::EmptyVideo | Error::Dimension(_) | Error::TooFewFrames { .. } => VcbStatus::Dimension,
            Error::DegenerateWindow(_)
            | Error::DegenerateItem(_)
            | Error::NonFinite(_)
            | Error::DegenerateVariance(_)
            | Error::UndefinedReliability { .. }
            | Error::DegenerateAnova
            | Error::InfeasibleSchedule { .. }
            | Error::UndefinedDirection => VcbStatus::Degenerate,
            Error::Backend { .. } | Error::BackendContract { .. } => VcbStatus::Backend,
            Error::Manifest { .. } | Error::Config(_) | Error::Policy(_) | Error::Extraction(_) => {
                VcbStatus::InvalidArgument
            }
            Error::Io(_) | Error::Json(_) => VcbStatus::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Fail(VcbStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(VcbStatus::from(&e), e.to_string())
    }
}

type Outcome = std::result::Result<(), Fail>;

fn null(what: &str) -> Fail {
    Fail(VcbStatus::NullPointer, format!("`{what}` is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(VcbStatus::InvalidArgument, msg.into())
}

/// Runs `f`, records any failure and turns panics into [`VcbStatus::Panic`].
fn guard(f: impl FnOnce() -> Outcome) -> VcbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            VcbStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            VcbStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> std::result::Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn out<'a, T>(ptr: *mut T, what: &str) -> std::result::Result<&'a mut T, Fail> {
    ptr.as_mut().ok_or_else(|| null(what))
}

unsafe fn string<'a>(ptr: *const c_char, what: &str) -> std::result::Result<&'a str, Fail> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| invalid(format!("`{what}` is not UTF-8")))
}

/// Length in bytes of the last error message on this thread, without the
/// terminator. 0 when the last call succeeded.
#[no_mangle]
pub extern "C" fn vcb_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |s| s.as_bytes().len()))
}

/// Copies the last error message into `buf` (NUL-terminated, truncated to `len - 1`
/// bytes). Returns the full message length.
#[no_mangle]
pub unsafe extern "C" fn vcb_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&[][..], |s| s.as_bytes());
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vcb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Frees a string returned by this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn vcb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---------------------------------------------------------------------------
// Videos

/// Decoded video. Opaque.
pub struct VcbVideo(FrameSequence);

fn frames_from_rgb(pixels: &[f32], frames: usize, height: usize, width: usize) -> std::result::Result<Vec<Frame>, Fail> {
    let per = height * width * 3;
    (0..frames)
        .map(|i| Ok(Frame::new(height, width, pixels[i * per..(i + 1) * per].to_vec())?))
        .collect()
}

/// Builds a video from `frames * height * width * 3` interleaved RGB floats in
/// `[0, 1]`, row-major, frame after frame.
#[no_mangle]
pub unsafe extern "C" fn vcb_video_from_rgb(
    pixels: *const f32,
    frames: usize,
    height: usize,
    width: usize,
    fps: f64,
    out_video: *mut *mut VcbVideo,
) -> VcbStatus {
    guard(|| {
        let out_video = out(out_video, "out_video")?;
        let n = frames
            .checked_mul(height)
            .and_then(|v| v.checked_mul(width))
            .and_then(|v| v.checked_mul(3))
            .ok_or_else(|| invalid("video size overflows"))?;
        let pixels = slice(pixels, n, "pixels")?;
        let seq = FrameSequence::new(frames_from_rgb(pixels, frames, height, width)?, fps)?;
        *out_video = Box::into_raw(Box::new(VcbVideo(seq)));
        Ok(())
    })
}

/// Decodes a video file. `target_fps <= 0` keeps the native rate.
#[no_mangle]
pub unsafe extern "C" fn vcb_video_decode(path: *const c_char, target_fps: f64, out_video: *mut *mut VcbVideo) -> VcbStatus {
    guard(|| {
        let out_video = out(out_video, "out_video")?;
        let path = string(path, "path")?;
        let fps = (target_fps > 0.0).then_some(target_fps);
        *out_video = Box::into_raw(Box::new(VcbVideo(decode_video(Path::new(path), fps)?)));
        Ok(())
    })
}

/// Frame count, height, width and frame rate. Any output pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn vcb_video_info(
    video: *const VcbVideo,
    frames: *mut usize,
    height: *mut usize,
    width: *mut usize,
    fps: *mut f64,
) -> VcbStatus {
    guard(|| {
        let v = &video.as_ref().ok_or_else(|| null("video"))?.0;
        let (h, w) = v.shape();
        if let Some(p) = frames.as_mut() {
            *p = v.len();
        }
        if let Some(p) = height.as_mut() {
            *p = h;
        }
        if let Some(p) = width.as_mut() {
            *p = w;
        }
        if let Some(p) = fps.as_mut() {
            *p = v.fps();
        }
        Ok(())
    })
}

/// New video holding frames `[first, first + count)`.
#[no_mangle]
pub unsafe extern "C" fn vcb_video_slice(
    video: *const VcbVideo,
    first: usize,
    count: usize,
    out_video: *mut *mut VcbVideo,
) -> VcbStatus {
    guard(|| {
        let out_video = out(out_video, "out_video")?;
        let v = &video.as_ref().ok_or_else(|| null("video"))?.0;
        let end = first.checked_add(count).ok_or_else(|| invalid("slice overflows"))?;
        *out_video = Box::into_raw(Box::new(VcbVideo(v.slice(first..end)?)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn vcb_video_free(video: *mut VcbVideo) {
    if !video.is_null() {
        drop(Box::from_raw(video));
    }
}

/// SSIM between frame `a_index` of `a` and frame `b_index` of `b`.
#[no_mangle]
pub unsafe extern "C" fn vcb_ssim(
    a: *const VcbVideo,
    a_index: usize,
    b: *const VcbVideo,
    b_index: usize,
    out_value: *mut f64,
) -> VcbStatus {
    guard(|| {
        let out_value = out(out_value, "out_value")?;
        let a = &a.as_ref().ok_or_else(|| null("a"))?.0;
        let b = &b.as_ref().ok_or_else(|| null("b"))?.0;
        if a_index >= a.len() || b_index >= b.len() {
            return Err(invalid("frame index out of range"));
        }
        *out_value = vcbench::pixel::ssim(a.frame(a_index), b.frame(b_index))?;
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// Evaluation

/// Metric parameters. Start from [`vcb_eval_config_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VcbEvalConfig {
    pub flicker_patch: usize,
    pub flicker_eta: f64,
    pub flow_block: usize,
    pub flow_window: usize,
    pub cd_k: usize,
    pub cd_z: usize,
    pub cd_min_distance: usize,
}

impl From<VcbEvalConfig> for EvalConfig {
    fn from(c: VcbEvalConfig) -> Self {
        EvalConfig {
            flicker: FlickerConfig {
                patch_size: c.flicker_patch,
                eta: c.flicker_eta,
            },
            flow: FlowParams {
                block_size: c.flow_block,
                window: c.flow_window,
            },
            connecting: ConnectingDistanceConfig {
                k: c.cd_k,
                z: c.cd_z,
                min_distance: c.cd_min_distance,
            },
        }
    }
}

#[no_mangle]
pub extern "C" fn vcb_eval_config_default() -> VcbEvalConfig {
    let d = EvalConfig::default();
    VcbEvalConfig {
        flicker_patch: d.flicker.patch_size,
        flicker_eta: d.flicker.eta,
        flow_block: d.flow.block_size,
        flow_window: d.flow.window,
        cd_k: d.connecting.k,
        cd_z: d.connecting.z,
        cd_min_distance: d.connecting.min_distance,
    }
}

/// Backends plus metric parameters. Opaque.
pub struct VcbEvaluator {
    backends: Backends,
    config: EvalConfig,
}

/// Which embedder slot a callback replaces.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VcbEmbedderSlot {
    Subject = 0,
    Background = 1,
}

/// Writes `dim` features for one `height * width` interleaved RGB frame into `out`.
/// Returns 0 on success. May be called from several threads at once.
pub type VcbEmbedFn = Option<
    unsafe extern "C" fn(user: *mut c_void, rgb: *const f32, height: usize, width: usize, out: *mut f64, dim: usize) -> c_int,
>;

struct CallbackEmbedder {
    name: String,
    func: unsafe extern "C" fn(*mut c_void, *const f32, usize, usize, *mut f64, usize) -> c_int,
    user: *mut c_void,
    dim: usize,
}

// The caller promises the callback and its user data are thread-safe.
unsafe impl Send for CallbackEmbedder {}
unsafe impl Sync for CallbackEmbedder {}

impl FrameEmbedder for CallbackEmbedder {
    fn name(&self) -> &str {
        &self.name
    }

    fn embed(&self, frame: &Frame) -> vcbench::Result<Vec<f64>> {
        let mut v = vec![0.0; self.dim];
        let rc = unsafe { (self.func)(self.user, frame.pixels().as_ptr(), frame.height(), frame.width(), v.as_mut_ptr(), self.dim) };
        if rc != 0 {
            return Err(Error::Backend {
                backend: self.name.clone(),
                message: format!("callback returned {rc}"),
            });
        }
        Ok(v)
    }
}

/// Creates an evaluator. `config` may be null for defaults. Each backend name may
/// be null for the built-in stub of that slot.
#[no_mangle]
pub unsafe extern "C" fn vcb_evaluator_new(
    config: *const VcbEvalConfig,
    subject: *const c_char,
    background: *const c_char,
    aesthetic: *const c_char,
    imaging: *const c_char,
    perceptual: *const c_char,
    out_evaluator: *mut *mut VcbEvaluator,
) -> VcbStatus {
    guard(|| {
        let out_evaluator = out(out_evaluator, "out_evaluator")?;
        let config: EvalConfig = config.as_ref().copied().map(Into::into).unwrap_or_default();
        config.validate()?;
        let defaults = BackendNames::default();
        let pick = |p: *const c_char, what: &str, default: String| -> std::result::Result<String, Fail> {
            if p.is_null() {
                Ok(default)
            } else {
                string(p, what).map(str::to_string)
            }
        };
        let names = BackendNames {
            subject: pick(subject, "subject", defaults.subject.clone())?,
            background: pick(background, "background", defaults.background.clone())?,
            aesthetic: pick(aesthetic, "aesthetic", defaults.aesthetic.clone())?,
            imaging: pick(imaging, "imaging", defaults.imaging.clone())?,
            perceptual: pick(perceptual, "perceptual", defaults.perceptual.clone())?,
        };
        let backends = BackendRegistry::default().build(&names)?;
        *out_evaluator = Box::into_raw(Box::new(VcbEvaluator { backends, config }));
        Ok(())
    })
}

/// Replaces an embedder with a callback producing `dim`-dimensional features.
/// `name` identifies the backend in reports and the config digest.
#[no_mangle]
pub unsafe extern "C" fn vcb_evaluator_set_embedder(
    evaluator: *mut VcbEvaluator,
    slot: VcbEmbedderSlot,
    name: *const c_char,
    func: VcbEmbedFn,
    user: *mut c_void,
    dim: usize,
) -> VcbStatus {
    guard(|| {
        let ev = evaluator.as_mut().ok_or_else(|| null("evaluator"))?;
        let func = func.ok_or_else(|| null("func"))?;
        let name = string(name, "name")?;
        if dim == 0 {
            return Err(invalid("embedding dimension must be >= 1"));
        }
        let e: Arc<dyn FrameEmbedder> = Arc::new(CallbackEmbedder {
            name: name.to_string(),
            func,
            user,
            dim,
        });
        match slot {
            VcbEmbedderSlot::Subject => ev.backends.subject = e,
            VcbEmbedderSlot::Background => ev.backends.background = e,
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn vcb_evaluator_free(evaluator: *mut VcbEvaluator) {
    if !evaluator.is_null() {
        drop(Box::from_raw(evaluator));
    }
}

/// Metric order in [`VcbScores::metrics`]: Q_S, Q_B, Q_F, Q_A, Q_I, C_P, C_OF, T_CD, T_LP.
pub const VCB_METRIC_COUNT: usize = 9;

/// Scores of one item. Missing values are NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct VcbScores {
    /// Raw metric values.
    pub metrics: [f64; VCB_METRIC_COUNT],
    /// Normalized values, higher is better.
    pub normalized: [f64; VCB_METRIC_COUNT],
    pub vqs: f64,
    pub secs: f64,
    pub tss: f64,
    pub score: f64,
    /// Non-zero when at least one metric failed.
    pub partial: c_int,
}

impl From<&ScoreReport> for VcbScores {
    fn from(r: &ScoreReport) -> Self {
        let arr = |v: &MetricVector<Option<f64>>| Metric::ALL.map(|m| v.get(m).unwrap_or(f64::NAN));
        VcbScores {
            metrics: arr(&r.metrics),
            normalized: arr(&r.metrics_normalized),
            vqs: r.vqs.unwrap_or(f64::NAN),
            secs: r.secs.unwrap_or(f64::NAN),
            tss: r.tss.unwrap_or(f64::NAN),
            score: r.score.unwrap_or(f64::NAN),
            partial: r.partial as c_int,
        }
    }
}

unsafe fn evaluate(
    evaluator: *const VcbEvaluator,
    start: *const VcbVideo,
    end: *const VcbVideo,
    generated: *const VcbVideo,
) -> std::result::Result<ScoreReport, Fail> {
    let ev = evaluator.as_ref().ok_or_else(|| null("evaluator"))?;
    let start = &start.as_ref().ok_or_else(|| null("start"))?.0;
    let end = &end.as_ref().ok_or_else(|| null("end"))?.0;
    let generated = &generated.as_ref().ok_or_else(|| null("generated"))?.0;
    let item = EvaluationItem::new("item", ClipPair::new(start.clone(), end.clone())?, generated.clone())?;
    Ok(scoring::evaluate_item(&item, &ev.backends, &ev.config)?)
}

/// Evaluates `generated` against the start and end clips.
#[no_mangle]
pub unsafe extern "C" fn vcb_evaluate(
    evaluator: *const VcbEvaluator,
    start: *const VcbVideo,
    end: *const VcbVideo,
    generated: *const VcbVideo,
    out_scores: *mut VcbScores,
) -> VcbStatus {
    guard(|| {
        let out_scores = out(out_scores, "out_scores")?;
        *out_scores = VcbScores::from(&evaluate(evaluator, start, end, generated)?);
        Ok(())
    })
}

/// Like [`vcb_evaluate`] but returns the full JSON report. Free it with
/// [`vcb_string_free`].
#[no_mangle]
pub unsafe extern "C" fn vcb_evaluate_json(
    evaluator: *const VcbEvaluator,
    start: *const VcbVideo,
    end: *const VcbVideo,
    generated: *const VcbVideo,
    out_json: *mut *mut c_char,
) -> VcbStatus {
    guard(|| {
        let out_json = out(out_json, "out_json")?;
        let json = evaluate(evaluator, start, end, generated)?.to_json()?;
        *out_json = CString::new(json).map_err(|_| invalid("report contains NUL"))?.into_raw();
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// Scoring and statistics

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VcbDimensionScores {
    pub vqs: f64,
    pub secs: f64,
    pub tss: f64,
    pub score: f64,
}

/// Aggregates nine raw metrics (order as in [`VcbScores::metrics`]).
#[no_mangle]
pub unsafe extern "C" fn vcb_aggregate(raw: *const f64, out_scores: *mut VcbDimensionScores) -> VcbStatus {
    guard(|| {
        let out_scores = out(out_scores, "out_scores")?;
        let raw: [f64; VCB_METRIC_COUNT] = slice(raw, VCB_METRIC_COUNT, "raw")?.try_into().expect("nine values");
        let s = scoring::aggregate(&MetricVector::from_array(raw))?;
        *out_scores = VcbDimensionScores {
            vqs: s.vqs,
            secs: s.secs,
            tss: s.tss,
            score: s.score,
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn vcb_pearson(x: *const f64, y: *const f64, n: usize, out_r: *mut f64) -> VcbStatus {
    guard(|| {
        let out_r = out(out_r, "out_r")?;
        *out_r = stats::pearson(slice(x, n, "x")?, slice(y, n, "y")?)?;
        Ok(())
    })
}

/// ICC(2,k) of an `subjects x raters` row-major matrix of ratings on `[scale_min, scale_max]`.
#[no_mangle]
pub unsafe extern "C" fn vcb_icc2k(
    ratings: *const f64,
    subjects: usize,
    raters: usize,
    scale_min: f64,
    scale_max: f64,
    out_icc: *mut f64,
) -> VcbStatus {
    guard(|| {
        let out_icc = out(out_icc, "out_icc")?;
        let n = subjects.checked_mul(raters).ok_or_else(|| invalid("matrix size overflows"))?;
        let data = slice(ratings, n, "ratings")?;
        let rows = data.chunks(raters.max(1)).map(<[f64]>::to_vec).collect();
        *out_icc = stats::icc2k(&RaterMatrix::new(rows, (scale_min, scale_max))?)?;
        Ok(())
    })
}

/// One-way ANOVA. `values` holds the groups back to back; `group_sizes[i]` is the
/// size of group `i`. An infinite F is reported as `INFINITY` with p = 0.
#[no_mangle]
pub unsafe extern "C" fn vcb_anova_oneway(
    values: *const f64,
    group_sizes: *const usize,
    groups: usize,
    out_f: *mut f64,
    out_p: *mut f64,
) -> VcbStatus {
    guard(|| {
        let out_f = out(out_f, "out_f")?;
        let out_p = out(out_p, "out_p")?;
        let sizes = slice(group_sizes, groups, "group_sizes")?;
        let total = sizes.iter().try_fold(0usize, |a, &s| a.checked_add(s)).ok_or_else(|| invalid("sizes overflow"))?;
        let values = slice(values, total, "values")?;
        let mut at = 0;
        let grouped: Vec<(String, Vec<f64>)> = sizes
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let g = (i.to_string(), values[at..at + s].to_vec());
                at += s;
                g
            })
            .collect();
        let r = stats::anova_oneway(&grouped)?;
        *out_f = r.f;
        *out_p = r.p;
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// Conditioning

/// Spherical interpolation between `u` and `v`, both of length `dim`, into `out`.
#[no_mangle]
pub unsafe extern "C" fn vcb_slerp(u: *const f64, v: *const f64, dim: usize, alpha: f64, out_vec: *mut f64) -> VcbStatus {
    guard(|| {
        if out_vec.is_null() && dim > 0 {
            return Err(null("out_vec"));
        }
        let r = conditioning::slerp(slice(u, dim, "u")?, slice(v, dim, "v")?, alpha)?;
        if dim > 0 {
            std::ptr::copy_nonoverlapping(r.as_ptr(), out_vec, dim);
        }
        Ok(())
    })
}

/// Latent layout: positions `[0, conditioned_head)` carry the start clip,
/// `[total - conditioned_tail, total)` the end clip, the rest is denoised.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VcbLatentSchedule {
    pub total_latent_len: usize,
    pub conditioned_head: usize,
    pub conditioned_tail: usize,
}

#[no_mangle]
pub unsafe extern "C" fn vcb_latent_schedule(
    n_start: usize,
    n_end: usize,
    n_total: usize,
    compression: usize,
    out_schedule: *mut VcbLatentSchedule,
) -> VcbStatus {
    guard(|| {
        let out_schedule = out(out_schedule, "out_schedule")?;
        let s = conditioning::latent_schedule(n_start, n_end, n_total, compression)?;
        *out_schedule = VcbLatentSchedule {
            total_latent_len: s.total_latent_len,
            conditioned_head: s.conditioned_head,
            conditioned_tail: s.conditioned_tail,
        };
        Ok(())
    })
}
