#ifndef LQHV_H
#define LQHV_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>

// Default atom budget for [`lqhv_build`] and [`lqhv_lhv_feasible`].
#define LQHV_DEFAULT_BUDGET 10000000

// Result of every call. Values 1 to 3 match the command-line exit codes.
typedef enum LqhvStatus {
  LQHV_STATUS_OK = 0,
  // Malformed or inconsistent input.
  LQHV_STATUS_INPUT_ERROR = 1,
  // A mathematical precondition failed, e.g. the family is signaling.
  LQHV_STATUS_PRECONDITION_FAILED = 2,
  // The joint space exceeds the atom budget.
  LQHV_STATUS_RESOURCE_EXCEEDED = 3,
  LQHV_STATUS_NULL_ARGUMENT = 4,
  // A Rust panic was caught at the boundary.
  LQHV_STATUS_INTERNAL_ERROR = 5,
} LqhvStatus;

// A distribution family in float or rational mode.
typedef struct LqhvFamily LqhvFamily;

// A signed measure on the joint space.
typedef struct LqhvMeasure LqhvMeasure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses a family JSON document. `tol` governs validation in float mode.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum LqhvStatus lqhv_family_from_json(const char *json, double tol, struct LqhvFamily **out);

// # Safety
// `family` must come from this library and not be used afterwards.
void lqhv_family_free(struct LqhvFamily *family);

// Serializes a family to JSON.
//
// # Safety
// `family` must be a live handle; `out` must be writable.
enum LqhvStatus lqhv_family_to_json(const struct LqhvFamily *family, char **out);

// Checks the nonsignaling condition. Returns `PreconditionFailed` when it
// fails, with the largest discrepancy in `discrepancy` (0 on success).
//
// # Safety
// `family` must be a live handle; `discrepancy` may be null.
enum LqhvStatus lqhv_check_nonsignaling(const struct LqhvFamily *family,
                                        double tol,
                                        double *discrepancy);

// Builds the simulating signed measure in the family's arithmetic mode.
//
// # Safety
// `family` must be a live handle; `out` must be writable.
enum LqhvStatus lqhv_build(const struct LqhvFamily *family,
                           double tol,
                           size_t budget,
                           struct LqhvMeasure **out);

// Parses a measure JSON document.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum LqhvStatus lqhv_measure_from_json(const char *json, double tol, struct LqhvMeasure **out);

// # Safety
// `measure` must come from this library and not be used afterwards.
void lqhv_measure_free(struct LqhvMeasure *measure);

// Number of atoms, in row-major axis order.
//
// # Safety
// `measure` must be a live handle; `out` must be writable.
enum LqhvStatus lqhv_measure_atom_count(const struct LqhvMeasure *measure, size_t *out);

// Copies the atoms as doubles into `buf`, which must hold `len` values
// with `len` equal to the atom count.
//
// # Safety
// `measure` must be a live handle; `buf` must be writable for `len` doubles.
enum LqhvStatus lqhv_measure_atoms(const struct LqhvMeasure *measure, double *buf, size_t len);

// Smallest atom.
//
// # Safety
// `measure` must be a live handle; `out` must be writable.
enum LqhvStatus lqhv_measure_min_atom(const struct LqhvMeasure *measure, double *out);

// Total variation: the sum of absolute atom values.
//
// # Safety
// `measure` must be a live handle; `out` must be writable.
enum LqhvStatus lqhv_measure_total_variation(const struct LqhvMeasure *measure, double *out);

// Serializes a measure to JSON.
//
// # Safety
// `measure` must be a live handle; `out` must be writable.
enum LqhvStatus lqhv_measure_to_json(const struct LqhvMeasure *measure, char **out);

// Compares every tuple marginal of `measure` with the family. Returns
// `PreconditionFailed` on a mismatch; `max_error` receives the largest
// entrywise difference either way.
//
// # Safety
// Both handles must be live; `max_error` may be null.
enum LqhvStatus lqhv_verify(const struct LqhvMeasure *measure,
                            const struct LqhvFamily *family,
                            double tol,
                            double *max_error);

// Decides whether a nonnegative simulating measure exists.
//
// # Safety
// `family` must be a live handle; `feasible` must be writable.
enum LqhvStatus lqhv_lhv_feasible(const struct LqhvFamily *family,
                                  double tol,
                                  size_t budget,
                                  bool *feasible);

// # Safety
// `s` must come from this library and not be used afterwards.
void lqhv_string_free(char *s);

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next call into the library on this thread.
const char *lqhv_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LQHV_H */
