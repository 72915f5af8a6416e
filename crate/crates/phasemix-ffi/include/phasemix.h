#ifndef PHASEMIX_H
#define PHASEMIX_H

/* Generated by cbindgen from the phasemix-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Call outcome. Mirrors the CLI exit-code split: model/argument problems
 * versus numerical failures.
 */
typedef enum {
  PmOk = 0,
  /**
   * Null pointer, malformed UTF-8, or an out-of-domain argument.
   */
  PmInvalidArgument = 1,
  /**
   * The model document failed schema or invariant validation.
   */
  PmInvalidModel = 2,
  /**
   * A numerical routine failed to converge or broke down.
   */
  PmNumericalError = 3,
  /**
   * A panic was caught at the boundary.
   */
  PmPanic = 4,
} PmStatus;

/**
 * Opaque mixture-model handle.
 */
typedef struct PmMixture PmMixture;

/**
 * Library version as a static string; do not free.
 */
const char *pm_version(void);

/**
 * Message for the most recent failure on this thread, or null. The caller
 * owns the returned string and must free it with `pm_string_free`.
 */
char *pm_last_error_message(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must be a pointer previously returned by a `phasemix` FFI call and
 * not yet freed; null is accepted and ignored.
 */
void pm_string_free(char *s);

/**
 * Build a mixture model from a JSON document (same schema as the CLI).
 * Returns null on failure; consult `pm_last_error_message`.
 *
 * # Safety
 * `json` must point to a valid NUL-terminated string.
 */
PmMixture *pm_mixture_from_json(const char *json);

/**
 * Release a mixture handle.
 *
 * # Safety
 * `handle` must come from `pm_mixture_from_json` and not be freed twice;
 * null is accepted and ignored.
 */
void pm_mixture_free(PmMixture *handle);

/**
 * Tail probability F̄(x) into `out`.
 *
 * # Safety
 * `handle` must be a live handle and `out` a valid f64 pointer.
 */
PmStatus pm_mixture_tail(const PmMixture *handle, double x, double *out);

/**
 * Density f(x) into `out`.
 *
 * # Safety
 * `handle` must be a live handle and `out` a valid f64 pointer.
 */
PmStatus pm_mixture_density(const PmMixture *handle, double x, double *out);

/**
 * Raw moment E[(SY)^n] into `out`; divergent moments yield +infinity.
 *
 * # Safety
 * `handle` must be a live handle and `out` a valid f64 pointer.
 */
PmStatus pm_mixture_moment(const PmMixture *handle, uint32_t n, double *out);

/**
 * Fill `buf` with `count` i.i.d. draws of S * Y, deterministic per seed.
 *
 * # Safety
 * `handle` must be a live handle and `buf` must have room for `count` f64.
 */
PmStatus pm_mixture_sample(const PmMixture *handle, uint64_t seed, size_t count, double *buf);

/**
 * Run the full tail classification and return the report as a JSON string
 * (caller frees with `pm_string_free`); null on failure.
 *
 * # Safety
 * `handle` must be a live handle.
 */
char *pm_mixture_mda_report_json(const PmMixture *handle);

#endif  /* PHASEMIX_H */
