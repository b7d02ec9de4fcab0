#ifndef SDSP_H
#define SDSP_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SdspStatus {
  SDSP_STATUS_OK = 0,
  SDSP_STATUS_NULL_POINTER = 1,
  SDSP_STATUS_INVALID_ARGUMENT = 2,
  SDSP_STATUS_DOMAIN = 3,
  SDSP_STATUS_EMPTY_MASK = 4,
  SDSP_STATUS_NO_SIGNAL = 5,
  SDSP_STATUS_GEOMETRY = 6,
  SDSP_STATUS_FORMAT = 7,
  SDSP_STATUS_IO = 8,
  SDSP_STATUS_BUFFER_TOO_SMALL = 9,
  SDSP_STATUS_PANIC = 10,
} SdspStatus;

/**
 * Gammatone filterbank with precomputed impulse responses.
 */
typedef struct SdspFilterbank SdspFilterbank;

/**
 * A tensor read from a container file.
 */
typedef struct SdspTensor SdspTensor;

/**
 * Gammatonegram time grid.
 */
typedef struct SdspGridConfig {
  /**
   * Bin hop, seconds.
   */
  double hop;
  /**
   * Analysis window length, seconds.
   */
  double window;
  /**
   * Lower clamp for energies, dB.
   */
  double floor_db;
} SdspGridConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or null. The pointer
 * stays valid until the next call into this library from the same thread.
 */
const char *sdsp_last_error(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *sdsp_version(void);

/**
 * Default grid: 10 ms hop, 25 ms Hamming window, -80 dB floor.
 */
struct SdspGridConfig sdsp_grid_config_default(void);

/**
 * Create a filterbank of `n_channels` ERB-spaced fourth-order channels
 * between `f_low` and `f_high`.
 *
 * # Safety
 * `out` must be a valid pointer; the handle is released with
 * [`sdsp_filterbank_free`].
 */
enum SdspStatus sdsp_filterbank_new(size_t n_channels,
                                    double f_low,
                                    double f_high,
                                    double sample_rate,
                                    struct SdspFilterbank **out);

/**
 * # Safety
 * `fb` must come from [`sdsp_filterbank_new`] and not be used afterwards.
 */
void sdsp_filterbank_free(struct SdspFilterbank *fb);

/**
 * Copy the centre frequencies (ascending, Hz) into `out`.
 *
 * # Safety
 * `out` must hold `out_len` doubles.
 */
enum SdspStatus sdsp_filterbank_center_freqs(const struct SdspFilterbank *fb,
                                             double *out,
                                             size_t out_len);

/**
 * Equivalent rectangular bandwidth scaled for a fourth-order filter, Hz.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SdspStatus sdsp_gammatone_bandwidth(double fc, double *out);

/**
 * Gammatonegram of `n` samples in dB, written row-major into `out`.
 * `rows` and `cols` receive the grid shape even when `out` is too small,
 * so a call with `out_len = 0` queries the size.
 *
 * # Safety
 * `x` must hold `n` doubles and `out` `out_len` doubles.
 */
enum SdspStatus sdsp_gammatonegram(const struct SdspFilterbank *fb,
                                   const double *x,
                                   size_t n,
                                   struct SdspGridConfig grid,
                                   double *out,
                                   size_t out_len,
                                   size_t *rows,
                                   size_t *cols);

/**
 * Full 2-D cross-correlation of two `rows x cols` matrices into a
 * `(2 rows - 1) x (2 cols - 1)` output; lag `(p, l)` sits at row
 * `p + rows - 1`, column `l + cols - 1`.
 *
 * # Safety
 * `g1` and `g2` must hold `rows * cols` doubles, `out` `out_len` doubles.
 */
enum SdspStatus sdsp_cross_gammatonegram(const double *g1,
                                         const double *g2,
                                         size_t rows,
                                         size_t cols,
                                         double *out,
                                         size_t out_len);

/**
 * Keep the pixels where `mask` is non-zero, convert the dB energies to
 * linear amplitude and scale to a maximum of 1.
 *
 * # Safety
 * `energies_db` and `out` must hold `rows * cols` doubles, `mask` as many bytes.
 */
enum SdspStatus sdsp_apply_mask(const double *energies_db,
                                const uint8_t *mask,
                                size_t rows,
                                size_t cols,
                                double *out);

/**
 * Delay of `x2` behind `x1` in seconds by phase-transform weighted
 * cross-correlation, searched within `max_itd`.
 *
 * # Safety
 * `x1` and `x2` must hold `n` doubles; the output pointers may be null.
 */
enum SdspStatus sdsp_gcc_phat_itd(const double *x1,
                                  const double *x2,
                                  size_t n,
                                  uint32_t sample_rate,
                                  double max_itd,
                                  double confidence_ratio,
                                  double *itd,
                                  double *peak_to_mean,
                                  bool *low_confidence);

/**
 * Direction of arrival in degrees for a delay of channel 2 behind channel
 * 1, for microphones `spacing` metres apart.
 *
 * # Safety
 * `alpha_deg` must be valid; `clamped` may be null.
 */
enum SdspStatus sdsp_itd_to_angle(double itd,
                                  double spacing,
                                  double speed_of_sound,
                                  double *alpha_deg,
                                  bool *clamped);

/**
 * Read a tensor container and its sidecar.
 *
 * # Safety
 * `path` must be a nul-terminated UTF-8 string, `out` a valid pointer; the
 * tensor is released with [`sdsp_tensor_free`].
 */
enum SdspStatus sdsp_tensor_read(const char *path, struct SdspTensor **out);

/**
 * # Safety
 * `t` must come from [`sdsp_tensor_read`] and not be used afterwards.
 */
void sdsp_tensor_free(struct SdspTensor *t);

/**
 * Number of dimensions, 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live tensor.
 */
size_t sdsp_tensor_ndim(const struct SdspTensor *t);

/**
 * Size of dimension `axis`, 0 when out of range.
 *
 * # Safety
 * `t` must be null or a live tensor.
 */
size_t sdsp_tensor_dim(const struct SdspTensor *t, size_t axis);

/**
 * Number of elements.
 *
 * # Safety
 * `t` must be null or a live tensor.
 */
size_t sdsp_tensor_len(const struct SdspTensor *t);

/**
 * Row-major element data, valid while the tensor lives.
 *
 * # Safety
 * `t` must be null or a live tensor.
 */
const float *sdsp_tensor_data(const struct SdspTensor *t);

/**
 * Tensor kind from the sidecar ("gammatonegram", "mask" or "crossgram").
 *
 * # Safety
 * `t` must be null or a live tensor.
 */
const char *sdsp_tensor_kind(const struct SdspTensor *t);

/**
 * Record id from the sidecar.
 *
 * # Safety
 * `t` must be null or a live tensor.
 */
const char *sdsp_tensor_record_id(const struct SdspTensor *t);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SDSP_H */
