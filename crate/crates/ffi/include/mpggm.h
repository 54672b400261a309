#ifndef MPGGM_H
#define MPGGM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MpggmStatus {
  MPGGM_STATUS_OK = 0,
  MPGGM_STATUS_NULL_POINTER = 1,
  MPGGM_STATUS_INVALID_ARGUMENT = 2,
  MPGGM_STATUS_CONFIG = 3,
  MPGGM_STATUS_PARSE = 4,
  MPGGM_STATUS_SCHEMA = 5,
  MPGGM_STATUS_DIMENSION_MISMATCH = 6,
  MPGGM_STATUS_DEGENERATE_INPUT = 7,
  MPGGM_STATUS_NOT_POSITIVE_DEFINITE = 8,
  MPGGM_STATUS_SAMPLER = 9,
  MPGGM_STATUS_IO = 10,
  MPGGM_STATUS_PANIC = 11,
  MPGGM_STATUS_OTHER = 12,
} MpggmStatus;

/**
 * Opaque dataset under construction: `groups` sample groups observed on
 * each platform.
 */
typedef struct MpggmDataset MpggmDataset;

/**
 * Opaque fitted posterior summary.
 */
typedef struct MpggmResult MpggmResult;

/**
 * Run settings. `iterations` counts sweeps kept after burn-in.
 */
typedef struct MpggmFitOptions {
  size_t iterations;
  size_t burnin;
  size_t chains;
  size_t thinning;
  uint64_t seed;
  /**
   * Worker threads, 0 for the default.
   */
  size_t threads;
  /**
   * Nonzero runs every chain sequentially on the calling thread.
   */
  uint8_t strict;
  double mpp_threshold;
} MpggmFitOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread, or null. Valid until
 * the next call into the library on the same thread.
 */
const char *mpggm_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mpggm_version(void);

/**
 * Creates an empty dataset with `platforms` platforms of `dims[s]`
 * variables each and `groups` groups.
 *
 * # Safety
 * `dims` must point to `platforms` values and `out` must be writable.
 */
enum MpggmStatus mpggm_dataset_new(size_t platforms,
                                   size_t groups,
                                   const size_t *dims,
                                   struct MpggmDataset **out);

/**
 * Sets the `rows × dims[platform]` row-major observations of one
 * (platform, group) cell. Columns are centered when the fit starts.
 *
 * # Safety
 * `dataset` must come from this library; `values` must point to
 * `rows * cols` doubles.
 */
enum MpggmStatus mpggm_dataset_set_group(struct MpggmDataset *dataset,
                                         size_t platform,
                                         size_t group,
                                         const double *values,
                                         size_t rows,
                                         size_t cols);

/**
 * Loads a dataset from a manifest file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum MpggmStatus mpggm_dataset_load_manifest(const char *path, struct MpggmDataset **out);

/**
 * Simulates a dataset from a scenario given as a JSON document.
 *
 * # Safety
 * `scenario_json` must be a NUL-terminated string and `out` writable.
 */
enum MpggmStatus mpggm_dataset_simulate(const char *scenario_json, struct MpggmDataset **out);

/**
 * # Safety
 * `dataset` must come from this library or be null.
 */
void mpggm_dataset_free(struct MpggmDataset *dataset);

struct MpggmFitOptions mpggm_fit_options_default(void);

/**
 * Fits the model. `options` may be null for the defaults.
 *
 * # Safety
 * `dataset` must come from this library, `options` must be null or valid
 * and `out` writable.
 */
enum MpggmStatus mpggm_fit(const struct MpggmDataset *dataset,
                           const struct MpggmFitOptions *options,
                           struct MpggmResult **out);

/**
 * # Safety
 * `result` must come from this library or be null.
 */
void mpggm_result_free(struct MpggmResult *result);

/**
 * Number of platforms, groups and sampled records.
 *
 * # Safety
 * `result` must come from this library; each out pointer may be null.
 */
enum MpggmStatus mpggm_result_shape(const struct MpggmResult *result,
                                    size_t *platforms,
                                    size_t *groups,
                                    size_t *records);

/**
 * Number of variables on `platform`.
 *
 * # Safety
 * `result` must come from this library and `out` writable.
 */
enum MpggmStatus mpggm_result_dim(const struct MpggmResult *result, size_t platform, size_t *out);

/**
 * Writes the `p × p` edge MPP matrix of one cell into `out` (row-major).
 *
 * # Safety
 * `result` must come from this library; `out` must hold `len` doubles.
 */
enum MpggmStatus mpggm_result_edge_mpp(const struct MpggmResult *result,
                                       size_t platform,
                                       size_t group,
                                       double *out,
                                       size_t len);

/**
 * Writes the `p × p` 0/1 adjacency of the selected graph of one cell.
 *
 * # Safety
 * `result` must come from this library; `out` must hold `len` bytes.
 */
enum MpggmStatus mpggm_result_selected(const struct MpggmResult *result,
                                       size_t platform,
                                       size_t group,
                                       uint8_t *out,
                                       size_t len);

/**
 * Writes the `K × K` MPP matrix of the group-similarity indicators of one
 * platform.
 *
 * # Safety
 * `result` must come from this library; `out` must hold `len` doubles.
 */
enum MpggmStatus mpggm_result_gamma_mpp(const struct MpggmResult *result,
                                        size_t platform,
                                        double *out,
                                        size_t len);

/**
 * Writes the `S × S` MPP matrix of the cross-platform indicators.
 *
 * # Safety
 * `result` must come from this library; `out` must hold `len` doubles.
 */
enum MpggmStatus mpggm_result_zeta_mpp(const struct MpggmResult *result, double *out, size_t len);

/**
 * Between-chain MPP correlation. `*available` is set to 0 for single-chain
 * runs, in which case `*out` is left untouched.
 *
 * # Safety
 * `result` must come from this library; both out pointers writable.
 */
enum MpggmStatus mpggm_result_chain_agreement(const struct MpggmResult *result,
                                              double *out,
                                              uint8_t *available);

/**
 * Total Cholesky checks and failures over all chains.
 *
 * # Safety
 * `result` must come from this library; out pointers may be null.
 */
enum MpggmStatus mpggm_result_pd_checks(const struct MpggmResult *result,
                                        uint64_t *checks,
                                        uint64_t *failures);

/**
 * Writes the same summary files as the command-line `fit` into `dir`.
 *
 * # Safety
 * `result` must come from this library and `dir` be a NUL-terminated
 * string.
 */
enum MpggmStatus mpggm_result_write(const struct MpggmResult *result, const char *dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MPGGM_H */
