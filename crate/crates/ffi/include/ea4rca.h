#ifndef EA4RCA_H
#define EA4RCA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum Ea4rcaStatus {
  EA4RCA_STATUS_OK = 0,
  EA4RCA_STATUS_NULL_ARGUMENT = 1,
  EA4RCA_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed JSON or a structural rule violation.
   */
  EA4RCA_STATUS_INVALID_DOCUMENT = 3,
  EA4RCA_STATUS_OVER_BUDGET = 4,
  EA4RCA_STATUS_INFEASIBLE = 5,
  EA4RCA_STATUS_NOT_FOUND = 6,
  EA4RCA_STATUS_INTERNAL = 7,
} Ea4rcaStatus;

/**
 * A parsed design document.
 */
typedef struct Ea4rcaDesign Ea4rcaDesign;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ea4rca_version(void);

/**
 * Message for the last failed call on this thread; empty after a success.
 *
 * The pointer stays valid until the next library call on the same thread.
 */
const char *ea4rca_last_error_message(void);

/**
 * Parses a design document.
 *
 * # Safety
 * `json` must be NUL-terminated; `out` must be writable. On success `*out`
 * owns a handle to release with [`ea4rca_design_free`].
 */
enum Ea4rcaStatus ea4rca_design_parse(const char *json, struct Ea4rcaDesign **out);

/**
 * Reference design for `app` (`mm`, `filter2d`, `fft`, `mmt`); `pus == 0`
 * keeps every PU.
 *
 * # Safety
 * `app` must be NUL-terminated; `out` must be writable.
 */
enum Ea4rcaStatus ea4rca_design_template(const char *app, uint32_t pus, struct Ea4rcaDesign **out);

/**
 * Releases a design handle. Null is ignored.
 *
 * # Safety
 * `d` must come from this library and not be used afterwards.
 */
void ea4rca_design_free(struct Ea4rcaDesign *d);

/**
 * Number of PUs in the design, 0 for a null handle.
 *
 * # Safety
 * `d` must be null or a live handle.
 */
uint32_t ea4rca_design_pu_count(const struct Ea4rcaDesign *d);

/**
 * Serializes the design to its canonical JSON document.
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum Ea4rcaStatus ea4rca_design_to_json(const struct Ea4rcaDesign *d, char **out);

/**
 * Validates against the default platform and writes the report JSON to
 * `*out` whenever a report exists. Returns `OVER_BUDGET` or
 * `INVALID_DOCUMENT` when the design is not deployable.
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum Ea4rcaStatus ea4rca_design_validate(const struct Ea4rcaDesign *d, char **out);

/**
 * Lowers the design and writes `{graph, census, files}` JSON to `*out`.
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum Ea4rcaStatus ea4rca_design_generate(const struct Ea4rcaDesign *d, char **out);

/**
 * Simulates the design. `size` may be null for the application default;
 * `pus == 0` keeps every PU. Writes the result JSON to `*out`.
 *
 * # Safety
 * `d` must be a live handle; `size` null or NUL-terminated; `out` writable.
 */
enum Ea4rcaStatus ea4rca_design_simulate(const struct Ea4rcaDesign *d,
                                         const char *size,
                                         uint32_t pus,
                                         char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void ea4rca_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EA4RCA_H */
