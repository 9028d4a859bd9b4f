#ifndef MAXMIN_H
#define MAXMIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define MAXMIN_OK 0

/**
 * A required pointer argument was null.
 */
#define MAXMIN_ERR_NULL 1

/**
 * Malformed input or an out-of-range parameter.
 */
#define MAXMIN_ERR_USAGE 2

#define MAXMIN_ERR_UNSUPPORTED 3

/**
 * Enumeration budget or size limit exceeded.
 */
#define MAXMIN_ERR_RESOURCE 4

/**
 * Certificate verification failed or the LP is infeasible.
 */
#define MAXMIN_ERR_VERIFICATION 5

/**
 * The library panicked; this is a bug.
 */
#define MAXMIN_ERR_INTERNAL 6

/**
 * Opaque instance handle.
 */
typedef struct MaxminInstance MaxminInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *maxmin_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void maxmin_string_free(char *s);

/**
 * Parses an instance document.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` a valid pointer.
 */
int32_t maxmin_instance_from_json(const char *json, struct MaxminInstance **out);

/**
 * # Safety
 * `inst` must be null or a handle from [`maxmin_instance_from_json`] that
 * has not been freed.
 */
void maxmin_instance_free(struct MaxminInstance *inst);

/**
 * Number of items, or 0 for a null handle.
 *
 * # Safety
 * `inst` must be null or a live handle.
 */
size_t maxmin_instance_items(const struct MaxminInstance *inst);

/**
 * Number of players, or 0 for a null handle.
 *
 * # Safety
 * `inst` must be null or a live handle.
 */
size_t maxmin_instance_players(const struct MaxminInstance *inst);

/**
 * Re-serializes the instance in canonical form.
 *
 * # Safety
 * `inst` must be a live handle and `out` a valid pointer.
 */
int32_t maxmin_instance_to_json(const struct MaxminInstance *inst, char **out);

/**
 * Approximate allocation with lexicographic tie-breaking. Writes a JSON
 * document with `min`, `threshold`, `guessed_opt` and `allocation`.
 *
 * # Safety
 * `inst` must be a live handle, `alpha` a nul-terminated rational such as
 * `"2/5"`, and `out` a valid pointer.
 */
int32_t maxmin_solve_approx(const struct MaxminInstance *inst, const char *alpha, char **out);

/**
 * Exact optimum. A `budget` of 0 selects the default node budget. Writes a
 * JSON document with `opt` and `allocation`.
 *
 * # Safety
 * `inst` must be a live handle and `out` a valid pointer.
 */
int32_t maxmin_opt(const struct MaxminInstance *inst, uint64_t budget, char **out);

/**
 * Optimum of the configuration LP, as a rational string.
 *
 * # Safety
 * `inst` must be a live handle and `out` a valid pointer.
 */
int32_t maxmin_lp_opt(const struct MaxminInstance *inst, char **out);

/**
 * Builds and verifies a dual certificate. `theorem` is 3 for instances
 * without matroids and 8 for instances with matroids. Writes a JSON
 * document with `threshold`, `y` (by item label) and `sum`.
 *
 * # Safety
 * `inst` must be a live handle and `out` a valid pointer.
 */
int32_t maxmin_certify(const struct MaxminInstance *inst, int32_t theorem, char **out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MAXMIN_H */
