#ifndef HSI_LRMR_H
#define HSI_LRMR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call. Values 1-3 match the CLI exit codes.
 */
typedef enum HsiStatus {
  HSI_STATUS_OK = 0,
  /**
   * Bad argument: null pointer, invalid UTF-8 path, bad parameter combination.
   */
  HSI_STATUS_USAGE = 1,
  /**
   * Unreadable, malformed or inconsistent data.
   */
  HSI_STATUS_DATA = 2,
  /**
   * The decomposition failed numerically.
   */
  HSI_STATUS_SOLVER = 3,
  HSI_STATUS_PANIC = 4,
} HsiStatus;

/**
 * Opaque cube handle.
 */
typedef struct HsiCube HsiCube;

/**
 * Noise profile, see `hsi_noise_paper_like`.
 */
typedef struct HsiNoiseSpec {
  double gaussian_sigma;
  double impulse_density;
  size_t dead_line_count;
  size_t stripe_count;
  double affected_band_fraction;
  uint64_t seed;
} HsiNoiseSpec;

/**
 * Denoising parameters: rank bound, corruption fraction, blocksize, stride.
 */
typedef struct HsiParams {
  size_t rank;
  double p;
  size_t block;
  size_t stride;
} HsiParams;

typedef struct HsiSolverOptions {
  size_t max_iters;
  double rel_tol;
  /**
   * Selects the randomized projection seeded by `projection_seed`.
   */
  bool randomized;
  uint64_t projection_seed;
  bool rank_continuation;
  /**
   * 0 uses the default thread pool.
   */
  size_t workers;
} HsiSolverOptions;

/**
 * Statistics of one `hsi_denoise` call.
 */
typedef struct HsiRunSummary {
  size_t patches;
  size_t cardinality;
  double mean_inner_iterations;
  size_t max_inner_iterations;
  size_t unconverged_patches;
  double wall_seconds;
} HsiRunSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *hsi_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hsi_version(void);

/**
 * Creates a cube from `rows * cols * bands` band-major values (copied).
 *
 * # Safety
 * `data` must point to that many readable doubles; `out` must be writable.
 */
enum HsiStatus hsi_cube_new(size_t rows,
                            size_t cols,
                            size_t bands,
                            const double *data,
                            struct HsiCube **out);

/**
 * Loads a canonical `.hdr`/`.raw` cube.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum HsiStatus hsi_cube_load(const char *path, struct HsiCube **out);

/**
 * Writes `cube` as a canonical `.hdr`/`.raw` pair.
 *
 * # Safety
 * `cube` must be a live handle; `path` a NUL-terminated string.
 */
enum HsiStatus hsi_cube_write(const struct HsiCube *cube, const char *path);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `cube` must be null or a handle not yet freed.
 */
void hsi_cube_free(struct HsiCube *cube);

/**
 * # Safety
 * `cube` must be a live handle; each output pointer may be null.
 */
enum HsiStatus hsi_cube_dims(const struct HsiCube *cube, size_t *rows, size_t *cols, size_t *bands);

/**
 * Copies the band-major values into `buffer`, which must hold exactly
 * `rows * cols * bands` doubles (`len`).
 *
 * # Safety
 * `cube` must be a live handle; `buffer` must be writable for `len` doubles.
 */
enum HsiStatus hsi_cube_copy_data(const struct HsiCube *cube, double *buffer, size_t len);

/**
 * Min-max normalizes onto `[0, 1]`; `min` / `max` (nullable) receive the
 * original range.
 *
 * # Safety
 * `cube` must be a live handle; `out` writable.
 */
enum HsiStatus hsi_cube_normalize(const struct HsiCube *cube,
                                  struct HsiCube **out,
                                  double *min,
                                  double *max);

/**
 * Gaussian sigma 0.025, impulse density 0.10, all bands, no lines or stripes.
 */
struct HsiNoiseSpec hsi_noise_paper_like(uint64_t seed);

/**
 * # Safety
 * `cube` must be a live handle, `spec` readable, `out` writable.
 */
enum HsiStatus hsi_corrupt(const struct HsiCube *cube,
                           const struct HsiNoiseSpec *spec,
                           struct HsiCube **out);

/**
 * `r = 7, p = 0.15, b = 20, s = 8`.
 */
struct HsiParams hsi_params_default(void);

/**
 * Exact projection, 100 iterations, tolerance 1e-6, rank continuation on.
 */
struct HsiSolverOptions hsi_solver_options_default(void);

/**
 * Denoises `cube`. `solver` may be null for the defaults; `summary` may be null.
 *
 * # Safety
 * `cube` must be a live handle, `params` readable, `out` writable.
 */
enum HsiStatus hsi_denoise(const struct HsiCube *cube,
                           const struct HsiParams *params,
                           const struct HsiSolverOptions *solver,
                           struct HsiCube **out,
                           struct HsiRunSummary *summary);

/**
 * PSNR in dB of `test` against `reference`; `+inf` for identical cubes.
 *
 * # Safety
 * Both handles must be live; `psnr_db` writable.
 */
enum HsiStatus hsi_psnr(const struct HsiCube *reference,
                        const struct HsiCube *test,
                        double *psnr_db);

/**
 * Central differences inside, one-sided at the ends; `len >= 2`.
 *
 * # Safety
 * `values` readable and `out` writable for `len` doubles.
 */
enum HsiStatus hsi_gradient_1d(const double *values, size_t len, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HSI_LRMR_H */
