#ifndef NVMEM_H
#define NVMEM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NvmStatus {
  NVM_STATUS_OK = 0,
  NVM_STATUS_NULL_POINTER = 1,
  NVM_STATUS_INVALID_ARGUMENT = 2,
  NVM_STATUS_PARSE = 3,
  NVM_STATUS_RUNTIME = 4,
  NVM_STATUS_NOT_CONVERGED = 5,
  NVM_STATUS_PANIC = 6,
} NvmStatus;

/**
 * A parsed pulse sequence.
 */
typedef struct NvmSequence NvmSequence;

/**
 * Simulation parameters.
 */
typedef struct NvmSetup NvmSetup;

/**
 * One experiment curve.
 */
typedef struct NvmSweep NvmSweep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until
 * the next `nvm_*` call on the same thread.
 */
const char *nvm_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *nvm_version(void);

/**
 * Default parameters.
 */
enum NvmStatus nvm_setup_new(struct NvmSetup **out);

/**
 * Parameters from a TOML run configuration. Config errors return
 * `NVM_STATUS_PARSE` with a `file:line:col` message.
 */
enum NvmStatus nvm_setup_load(const char *path, struct NvmSetup **out);

void nvm_setup_free(struct NvmSetup *setup);

/**
 * Sets a numeric parameter in SI units. Names: `t1_e`, `t2_pure_c`,
 * `t2star_n`, `t2star_e`, `field` (re-calibrates the secular coupling),
 * `alpha`, `beta`, `gamma`, `mw_rabi`, `rf_rabi`, `init_laser`,
 * `cycle_laser`, `cycles`.
 */
enum NvmStatus nvm_setup_set(struct NvmSetup *setup, const char *name, double value);

/**
 * Numeric hyperfine enhancement of the RF1 coupling.
 */
enum NvmStatus nvm_enhancement(const struct NvmSetup *setup, double *out);

/**
 * Closed-form pumping populations `(0↑, 0↓, 1↑, 1↓)` after a laser pulse
 * of `t` seconds from the swapped state. Rates in 1/s.
 */
enum NvmStatus nvm_analytic_populations(double alpha,
                                        double beta,
                                        double gamma,
                                        double t,
                                        double *out);

/**
 * Nuclear Rabi oscillation at effective Rabi frequency `rabi` (Hz).
 */
enum NvmStatus nvm_run_rabi(const struct NvmSetup *setup,
                            double rabi,
                            const double *durations,
                            size_t len,
                            struct NvmSweep **out);

/**
 * `|0,↑⟩` population after 0…`cycles` purification cycles.
 */
enum NvmStatus nvm_run_purification(const struct NvmSetup *setup,
                                    uint32_t cycles,
                                    double laser,
                                    struct NvmSweep **out);

/**
 * Mean fidelity of the four equatorial states under the loss-budget
 * preset (`lossless = 0`) or the lossless pipeline.
 */
enum NvmStatus nvm_transfer_fidelity(const struct NvmSetup *setup,
                                     bool lossless,
                                     double *per_state,
                                     double *mean);

/**
 * CPMG storage ensemble; writes the fitted decay constant to `tau`.
 */
enum NvmStatus nvm_run_cpmg(const struct NvmSetup *setup,
                            uint32_t n_pulses,
                            const double *times,
                            size_t len,
                            size_t ensemble,
                            uint64_t seed,
                            struct NvmSweep **out,
                            double *tau);

size_t nvm_sweep_len(const struct NvmSweep *sweep);

/**
 * Copies the sweep axis into `buf` (capacity `cap`).
 */
enum NvmStatus nvm_sweep_x(const struct NvmSweep *sweep, double *buf, size_t cap);

/**
 * Copies the signal into `buf` (capacity `cap`).
 */
enum NvmStatus nvm_sweep_y(const struct NvmSweep *sweep, double *buf, size_t cap);

/**
 * Headline number by key, e.g. `rabi_frequency_hz` or `p0_up`.
 */
enum NvmStatus nvm_sweep_summary(const struct NvmSweep *sweep, const char *key, double *out);

void nvm_sweep_free(struct NvmSweep *sweep);

/**
 * Parses sequence text. Syntax errors return `NVM_STATUS_PARSE` with a
 * `line:col` message.
 */
enum NvmStatus nvm_sequence_parse(const char *text, struct NvmSequence **out);

/**
 * Number of pulse events with every sweep variable at its first value.
 */
enum NvmStatus nvm_sequence_event_count(const struct NvmSequence *seq, size_t *out);

/**
 * Canonical text of the sequence. Writes at most `cap` bytes including
 * the NUL; `needed` receives the full size including the NUL.
 */
enum NvmStatus nvm_sequence_emit(const struct NvmSequence *seq,
                                 char *buf,
                                 size_t cap,
                                 size_t *needed);

void nvm_sequence_free(struct NvmSequence *seq);

/**
 * Cosine fit; `params` receives amplitude, frequency, phase, offset.
 */
enum NvmStatus nvm_fit_cosine(const double *x, const double *y, size_t len, double *params);

/**
 * Exponential fit; `params` receives amplitude, time constant, offset.
 */
enum NvmStatus nvm_fit_exponential(const double *x, const double *y, size_t len, double *params);

/**
 * Pumping-rate fit to the two tomography curves; `params` receives
 * alpha, beta, gamma (1/s).
 */
enum NvmStatus nvm_fit_rates(const double *t,
                             const double *total,
                             const double *up,
                             size_t len,
                             double *params);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NVMEM_H */
