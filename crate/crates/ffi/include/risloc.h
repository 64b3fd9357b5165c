#ifndef RISLOC_H
#define RISLOC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RislocStatus {
  RISLOC_STATUS_OK = 0,
  RISLOC_STATUS_INVALID_ARGUMENT = 1,
  RISLOC_STATUS_CONFIG_ERROR = 2,
  RISLOC_STATUS_NUMERICAL_FAILURE = 3,
  RISLOC_STATUS_IO = 4,
  RISLOC_STATUS_NULL_POINTER = 5,
  RISLOC_STATUS_PANIC = 6,
} RislocStatus;

typedef enum RislocScheme {
  RISLOC_SCHEME_PROPOSED = 0,
  RISLOC_SCHEME_EXHAUSTIVE = 1,
  RISLOC_SCHEME_RANDOM_PHASE = 2,
  RISLOC_SCHEME_OPTIMAL = 3,
} RislocScheme;

/**
 * Opaque simulation configuration.
 */
typedef struct RislocConfig RislocConfig;

/**
 * Opaque simulator: built codebooks, channel and estimator grids.
 */
typedef struct RislocSimulator RislocSimulator;

/**
 * Outcome of one trial.
 */
typedef struct RislocTrialResult {
  /**
   * Squared position error, m^2.
   */
  double pe;
  /**
   * Squared orientation error, rad^2.
   */
  double oe;
  /**
   * Achievable rate, bits per OFDM symbol.
   */
  double rate;
  size_t slots;
  double ms_x_hat;
  double ms_y_hat;
  double alpha_hat;
} RislocTrialResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL.
 *
 * # Safety
 * `buf` must be null or point to at least `len` writable bytes.
 */
size_t risloc_last_error_message(char *buf, size_t len);

/**
 * Reference configuration.
 *
 * # Safety
 * `out` must be a valid pointer to write the handle to.
 */
enum RislocStatus risloc_config_default(struct RislocConfig **out);

/**
 * Loads a `key = value` configuration file.
 *
 * # Safety
 * `path` must be a NUL-terminated string, `out` a valid pointer.
 */
enum RislocStatus risloc_config_load(const char *path, struct RislocConfig **out);

/**
 * # Safety
 * `config` must be null or a handle from this library, not yet freed.
 */
void risloc_config_free(struct RislocConfig *config);

/**
 * # Safety
 * `config` must be a live handle.
 */
enum RislocStatus risloc_config_set_trials(struct RislocConfig *config, size_t trials);

/**
 * # Safety
 * `config` must be a live handle.
 */
enum RislocStatus risloc_config_set_seed(struct RislocConfig *config, uint64_t seed);

/**
 * Replaces the SNR list (dB); values are sorted and deduplicated.
 *
 * # Safety
 * `config` must be a live handle and `snr_db` point to `len` doubles.
 */
enum RislocStatus risloc_config_set_snr_db(struct RislocConfig *config,
                                           const double *snr_db,
                                           size_t len);

/**
 * Largest RIS size for which the scene stays in the far field.
 *
 * # Safety
 * `config` must be a live handle and `out` a valid pointer.
 */
enum RislocStatus risloc_far_field_limit(const struct RislocConfig *config, size_t *out);

/**
 * Per-subcarrier thermal noise power in dBm.
 */
double risloc_noise_power_dbm(double bandwidth_hz, size_t num_subcarriers);

/**
 * Builds codebooks and grids for a configuration.
 *
 * # Safety
 * `config` must be a live handle and `out` a valid pointer.
 */
enum RislocStatus risloc_simulator_new(const struct RislocConfig *config,
                                       struct RislocSimulator **out);

/**
 * # Safety
 * `sim` must be null or a handle from this library, not yet freed.
 */
void risloc_simulator_free(struct RislocSimulator *sim);

/**
 * Training slots a scheme consumes.
 *
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
enum RislocStatus risloc_slot_count(const struct RislocSimulator *sim,
                                    enum RislocScheme scheme,
                                    size_t *out);

/**
 * Runs one seeded trial at the given SNR.
 *
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
enum RislocStatus risloc_run_trial(const struct RislocSimulator *sim,
                                   enum RislocScheme scheme,
                                   double snr_db,
                                   uint64_t seed,
                                   struct RislocTrialResult *out);

/**
 * Runs the configured sweep and writes the results CSV to `path`.
 *
 * # Safety
 * `sim` must be a live handle and `path` a NUL-terminated string.
 */
enum RislocStatus risloc_run_sweep_csv(const struct RislocSimulator *sim, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RISLOC_H */
