#ifndef AIRMATCH_H
#define AIRMATCH_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every `am_*` call.
 */
typedef enum AmStatus {
  AM_STATUS_OK = 0,
  AM_STATUS_NULL_POINTER = 1,
  AM_STATUS_INVALID_ARGUMENT = 2,
  AM_STATUS_SCENARIO = 3,
  AM_STATUS_NUMERIC = 4,
  AM_STATUS_FIT = 5,
  AM_STATUS_MEASUREMENT = 6,
  AM_STATUS_IO = 7,
  AM_STATUS_BUFFER_TOO_SMALL = 8,
  AM_STATUS_PANIC = 9,
} AmStatus;

/**
 * Values for the `technology` argument.
 */
typedef enum AmTechnology {
  AM_TECHNOLOGY_AERO = 0,
  AM_TECHNOLOGY_PIN = 1,
  AM_TECHNOLOGY_STANDARD = 2,
} AmTechnology;

/**
 * Scenario plus the device models fitted from it.
 */
typedef struct AmSession AmSession;

typedef struct AmComplex {
  double re;
  double im;
} AmComplex;

typedef struct AmConfigOptimum {
  uint8_t config;
  double c_m;
  double c_t;
  double s11_db;
} AmConfigOptimum;

typedef struct AmTuneResult {
  struct AmConfigOptimum best;
  uint64_t evaluations;
  /**
   * Indexed by configuration bits.
   */
  struct AmConfigOptimum per_config[16];
} AmTuneResult;

typedef struct AmResonance {
  double fc_hz;
  double df_hz;
  double q;
  double dip_db;
} AmResonance;

/**
 * Mean timing of the standard close/open script, in seconds.
 */
typedef struct AmTiming {
  double latency_close;
  double latency_open;
  double switching_close;
  double switching_open;
  double pin_switching_time;
} AmTiming;

typedef struct AmDeviceThermal {
  /**
   * Thermal resistance in K/W.
   */
  double theta;
  double r_off;
  double c_off;
  double p_on;
  double p_off;
  double residual_on;
  double residual_off;
  bool exact;
} AmDeviceThermal;

typedef struct AmThermal {
  struct AmDeviceThermal aero;
  struct AmDeviceThermal pin;
} AmThermal;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Opens a session on the bundled default scenario.
 *
 * # Safety
 * `out` must be null or point to writable storage for one pointer.
 */
enum AmStatus am_session_new_default(struct AmSession **out);

/**
 * Opens a session on a scenario given as TOML text.
 *
 * # Safety
 * `toml` must be null or a nul-terminated string; `out` as for
 * [`am_session_new_default`].
 */
enum AmStatus am_session_new_from_toml(const char *toml, struct AmSession **out);

/**
 * Releases a session. Null is ignored.
 *
 * # Safety
 * `s` must be null or a pointer returned by an `am_session_new_*` call,
 * not yet freed.
 */
void am_session_free(struct AmSession *s);

/**
 * Hex SHA-256 of the scenario text.
 *
 * # Safety
 * `buf` must be null or hold `cap` bytes; `len_out` null or writable.
 */
enum AmStatus am_scenario_hash(const struct AmSession *s, char *buf, size_t cap, size_t *len_out);

/**
 * Message of the last failed call on this thread. Writes an empty
 * string when the last call succeeded.
 *
 * # Safety
 * As for [`am_scenario_hash`].
 */
enum AmStatus am_last_error_message(char *buf, size_t cap, size_t *len_out);

/**
 * Series-arm capacitance of `config_bits` in farads with ideal
 * switches: the nominal `c_m` plus every closed bank capacitor.
 *
 * # Safety
 * `s` must be a live session; `out` null or writable.
 */
enum AmStatus am_bank_capacitance(const struct AmSession *s, uint8_t config_bits, double *out);

/**
 * Input reflection of the matching network with trimmers `c_m`, `c_t`
 * in farads. Pass a negative trimmer value to use the scenario nominal.
 *
 * # Safety
 * `s` must be a live session; `out` null or writable.
 */
enum AmStatus am_s11(const struct AmSession *s,
                     int32_t technology,
                     bool loaded,
                     uint8_t config_bits,
                     double frequency_hz,
                     double c_m,
                     double c_t,
                     struct AmComplex *out);

/**
 * Trimmer search over all sixteen configurations at `target_hz`.
 *
 * # Safety
 * `s` must be a live session; `out` null or writable.
 */
enum AmStatus am_tune(const struct AmSession *s,
                      int32_t technology,
                      bool loaded,
                      double target_hz,
                      struct AmTuneResult *out);

/**
 * Resonance and Q of a reflection sweep given as `n` frequencies and
 * the real and imaginary parts of S11.
 *
 * # Safety
 * `freqs_hz`, `re` and `im` must each point to `n` readable doubles;
 * `out` null or writable.
 */
enum AmStatus am_q_from_s11(const double *freqs_hz,
                            const double *re,
                            const double *im,
                            size_t n,
                            struct AmResonance *out);

/**
 * Air control timing on a standard close/open script.
 *
 * # Safety
 * `s` must be a live session; `out` null or writable.
 */
enum AmStatus am_pneumo_timing(const struct AmSession *s, struct AmTiming *out);

/**
 * Thermal calibration of both switch technologies.
 *
 * # Safety
 * `s` must be a live session; `out` null or writable.
 */
enum AmStatus am_thermal_calibrate(const struct AmSession *s, struct AmThermal *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AIRMATCH_H */
