#ifndef HYBRIDLOC_H
#define HYBRIDLOC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HlStatus {
  HL_STATUS_OK = 0,
  HL_STATUS_NULL_POINTER = 1,
  HL_STATUS_INVALID_ARGUMENT = 2,
  HL_STATUS_CONFIG = 3,
  HL_STATUS_IO = 4,
  HL_STATUS_FORMAT = 5,
  HL_STATUS_NON_FINITE = 6,
  HL_STATUS_DIMENSION_MISMATCH = 7,
  HL_STATUS_EMPTY_MEMORY = 8,
  HL_STATUS_EMPTY_DEPTH = 9,
  HL_STATUS_PANIC = 10,
  HL_STATUS_OTHER = 11,
} HlStatus;

/**
 * Relative pose network in inference mode.
 */
typedef struct HlNet HlNet;

/**
 * Trained place-recognition memory.
 */
typedef struct HlWnn HlWnn;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null after a
 * success. Valid until the next call on the same thread.
 */
const char *hl_last_error_message(void);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HlStatus hl_wnn_load(const char *path, struct HlWnn **out);

/**
 * # Safety
 * `model` must come from [`hl_wnn_load`] and not be freed twice. Null is a
 * no-op.
 */
void hl_wnn_free(struct HlWnn *model);

/**
 * Number of stored places; 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t hl_wnn_place_count(const struct HlWnn *model);

/**
 * Recalls the place for a raw 8-bit image of the size the model was
 * trained on.
 *
 * # Safety
 * `pixels` must hold `width * height` bytes; the out pointers must be valid.
 */
enum HlStatus hl_wnn_recall(const struct HlWnn *model,
                            const uint8_t *pixels,
                            size_t width,
                            size_t height,
                            uint32_t *place_id,
                            double *vote_fraction);

/**
 * Pose of a stored place as a row-major 4x4 matrix.
 *
 * # Safety
 * `out` must point to 16 doubles.
 */
enum HlStatus hl_wnn_place_pose(const struct HlWnn *model, uint32_t place_id, double *out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HlStatus hl_net_load(const char *path, struct HlNet **out);

/**
 * # Safety
 * `net` must come from [`hl_net_load`] and not be freed twice. Null is a
 * no-op.
 */
void hl_net_free(struct HlNet *net);

/**
 * Predicts the relative pose of `live` with respect to `key`. Both images
 * have the same size and are resampled to the network input.
 *
 * # Safety
 * Both pixel buffers must hold `width * height` bytes; `out` must point to
 * 6 doubles.
 */
enum HlStatus hl_net_predict(const struct HlNet *net,
                             const uint8_t *key,
                             const uint8_t *live,
                             size_t width,
                             size_t height,
                             double *out);

/**
 * Exponential map of a 6-vector to a row-major 4x4 rigid transform.
 *
 * # Safety
 * `delta` must point to 6 doubles and `out` to 16.
 */
enum HlStatus hl_se3_exp(const double *delta, double *out);

/**
 * Mean distance in meters between the scene points moved by the predicted
 * and by the true pose. Depth values that are zero or not finite are
 * skipped.
 *
 * # Safety
 * `pred` and `truth` point to 6 doubles, `depth` to `width * height`
 * doubles, `out` to one double.
 */
enum HlStatus hl_projection_loss(const double *pred,
                                 const double *truth,
                                 const double *depth,
                                 size_t width,
                                 size_t height,
                                 double fx,
                                 double fy,
                                 double cx,
                                 double cy,
                                 double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYBRIDLOC_H */
