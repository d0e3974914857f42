#ifndef VCBENCH_H
#define VCBENCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Metric order in [`VcbScores::metrics`]: Q_S, Q_B, Q_F, Q_A, Q_I, C_P, C_OF, T_CD, T_LP.
 */
#define VCB_METRIC_COUNT 9

/*
 Result of every call.
 */
typedef enum VcbStatus {
  VCB_STATUS_OK = 0,
  VCB_STATUS_NULL_POINTER = 1,
  VCB_STATUS_INVALID_ARGUMENT = 2,
  VCB_STATUS_DIMENSION = 3,
  VCB_STATUS_DEGENERATE = 4,
  VCB_STATUS_DECODE = 5,
  VCB_STATUS_IO = 6,
  VCB_STATUS_BACKEND = 7,
  VCB_STATUS_PANIC = 8,
} VcbStatus;

/*
 Which embedder slot a callback replaces.
 */
typedef enum VcbEmbedderSlot {
  VCB_EMBEDDER_SLOT_SUBJECT = 0,
  VCB_EMBEDDER_SLOT_BACKGROUND = 1,
} VcbEmbedderSlot;

/*
 Backends plus metric parameters. Opaque.
 */
typedef struct VcbEvaluator VcbEvaluator;

/*
 Decoded video. Opaque.
 */
typedef struct VcbVideo VcbVideo;

/*
 Metric parameters. Start from [`vcb_eval_config_default`].
 */
typedef struct VcbEvalConfig {
  size_t flicker_patch;
  double flicker_eta;
  size_t flow_block;
  size_t flow_window;
  size_t cd_k;
  size_t cd_z;
  size_t cd_min_distance;
} VcbEvalConfig;

/*
 Writes `dim` features for one `height * width` interleaved RGB frame into `out`.
 Returns 0 on success. May be called from several threads at once.
 */
typedef int (*VcbEmbedFn)(void *user,
                          const float *rgb,
                          size_t height,
                          size_t width,
                          double *out,
                          size_t dim);

/*
 Scores of one item. Missing values are NaN.
 */
typedef struct VcbScores {
  /*
   Raw metric values.
   */
  double metrics[VCB_METRIC_COUNT];
  /*
   Normalized values, higher is better.
   */
  double normalized[VCB_METRIC_COUNT];
  double vqs;
  double secs;
  double tss;
  double score;
  /*
   Non-zero when at least one metric failed.
   */
  int partial;
} VcbScores;

typedef struct VcbDimensionScores {
  double vqs;
  double secs;
  double tss;
  double score;
} VcbDimensionScores;

/*
 Latent layout: positions `[0, conditioned_head)` carry the start clip,
 `[total - conditioned_tail, total)` the end clip, the rest is denoised.
 */
typedef struct VcbLatentSchedule {
  size_t total_latent_len;
  size_t conditioned_head;
  size_t conditioned_tail;
} VcbLatentSchedule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Length in bytes of the last error message on this thread, without the
 terminator. 0 when the last call succeeded.
 */
size_t vcb_last_error_length(void);

/*
 Copies the last error message into `buf` (NUL-terminated, truncated to `len - 1`
 bytes). Returns the full message length.
 */
size_t vcb_last_error_message(char *buf, size_t len);

/*
 Library version as a static NUL-terminated string.
 */
const char *vcb_version(void);

/*
 Frees a string returned by this library. Null is ignored.
 */
void vcb_string_free(char *s);

/*
 Builds a video from `frames * height * width * 3` interleaved RGB floats in
 `[0, 1]`, row-major, frame after frame.
 */
enum VcbStatus vcb_video_from_rgb(const float *pixels,
                                  size_t frames,
                                  size_t height,
                                  size_t width,
                                  double fps,
                                  struct VcbVideo **out_video);

/*
 Decodes a video file. `target_fps <= 0` keeps the native rate.
 */
enum VcbStatus vcb_video_decode(const char *path, double target_fps, struct VcbVideo **out_video);

/*
 Frame count, height, width and frame rate. Any output pointer may be null.
 */
enum VcbStatus vcb_video_info(const struct VcbVideo *video,
                              size_t *frames,
                              size_t *height,
                              size_t *width,
                              double *fps);

/*
 New video holding frames `[first, first + count)`.
 */
enum VcbStatus vcb_video_slice(const struct VcbVideo *video,
                               size_t first,
                               size_t count,
                               struct VcbVideo **out_video);

void vcb_video_free(struct VcbVideo *video);

/*
 SSIM between frame `a_index` of `a` and frame `b_index` of `b`.
 */
enum VcbStatus vcb_ssim(const struct VcbVideo *a,
                        size_t a_index,
                        const struct VcbVideo *b,
                        size_t b_index,
                        double *out_value);

struct VcbEvalConfig vcb_eval_config_default(void);

/*
 Creates an evaluator. `config` may be null for defaults. Each backend name may
 be null for the built-in stub of that slot.
 */
enum VcbStatus vcb_evaluator_new(const struct VcbEvalConfig *config,
                                 const char *subject,
                                 const char *background,
                                 const char *aesthetic,
                                 const char *imaging,
                                 const char *perceptual,
                                 struct VcbEvaluator **out_evaluator);

/*
 Replaces an embedder with a callback producing `dim`-dimensional features.
 `name` identifies the backend in reports and the config digest.
 */
enum VcbStatus vcb_evaluator_set_embedder(struct VcbEvaluator *evaluator,
                                          enum VcbEmbedderSlot slot,
                                          const char *name,
                                          VcbEmbedFn func,
                                          void *user,
                                          size_t dim);

void vcb_evaluator_free(struct VcbEvaluator *evaluator);

/*
 Evaluates `generated` against the start and end clips.
 */
enum VcbStatus vcb_evaluate(const struct VcbEvaluator *evaluator,
                            const struct VcbVideo *start,
                            const struct VcbVideo *end,
                            const struct VcbVideo *generated,
                            struct VcbScores *out_scores);

/*
 Like [`vcb_evaluate`] but returns the full JSON report. Free it with
 [`vcb_string_free`].
 */
enum VcbStatus vcb_evaluate_json(const struct VcbEvaluator *evaluator,
                                 const struct VcbVideo *start,
                                 const struct VcbVideo *end,
                                 const struct VcbVideo *generated,
                                 char **out_json);

/*
 Aggregates nine raw metrics (order as in [`VcbScores::metrics`]).
 */
enum VcbStatus vcb_aggregate(const double *raw, struct VcbDimensionScores *out_scores);

enum VcbStatus vcb_pearson(const double *x, const double *y, size_t n, double *out_r);

/*
 ICC(2,k) of an `subjects x raters` row-major matrix of ratings on `[scale_min, scale_max]`.
 */
enum VcbStatus vcb_icc2k(const double *ratings,
                         size_t subjects,
                         size_t raters,
                         double scale_min,
                         double scale_max,
                         double *out_icc);

/*
 One-way ANOVA. `values` holds the groups back to back; `group_sizes[i]` is the
 size of group `i`. An infinite F is reported as `INFINITY` with p = 0.
 */
enum VcbStatus vcb_anova_oneway(const double *values,
                                const size_t *group_sizes,
                                size_t groups,
                                double *out_f,
                                double *out_p);

/*
 Spherical interpolation between `u` and `v`, both of length `dim`, into `out`.
 */
enum VcbStatus vcb_slerp(const double *u,
                         const double *v,
                         size_t dim,
                         double alpha,
                         double *out_vec);

enum VcbStatus vcb_latent_schedule(size_t n_start,
                                   size_t n_end,
                                   size_t n_total,
                                   size_t compression,
                                   struct VcbLatentSchedule *out_schedule);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VCBENCH_H */
