#ifndef BITSTUFF_H
#define BITSTUFF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes; 2 to 5 match the command-line exit codes.
typedef enum BsStatus {
  BS_STATUS_OK = 0,
  // Null pointer, invalid UTF-8, or an output buffer that is too small.
  BS_STATUS_INVALID_ARGUMENT = 1,
  BS_STATUS_PARSE = 2,
  BS_STATUS_VALIDATION = 3,
  BS_STATUS_SIZE_CAP = 4,
  BS_STATUS_SOLVER = 5,
  // A Rust panic was caught at the boundary.
  BS_STATUS_INTERNAL = 6,
} BsStatus;

// A constraint (forbidden-pattern system).
typedef struct BsConstraint BsConstraint;

// A validated encoder bound to its constraint.
typedef struct BsEncoder BsEncoder;

// LP bounds of an encoder at one geometry.
typedef struct BsBounds {
  double lp_min;
  double lp_max;
  uintptr_t vars;
  uintptr_t cons;
} BsBounds;

// Sampled rate estimate in bits per symbol.
typedef struct BsRate {
  double mean;
  double std_error;
  double per_interior_cell;
  uintptr_t trials;
} BsRate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread; valid until the next call
// that fails on the same thread.
const char *bs_last_error(void);

// Builds a constraint from `builtin:<name>[:<param>]` or a definition text.
//
// # Safety
// `source` must be a NUL-terminated string and `out` a valid pointer.
enum BsStatus bs_constraint_new(const char *source, struct BsConstraint **out_c);

// # Safety
// `c` must come from [`bs_constraint_new`] and not be used afterwards.
void bs_constraint_free(struct BsConstraint *c);

// Parses and validates an encoder definition against `c`.
//
// # Safety
// `c` must be a live constraint handle, `def` NUL-terminated, `out` valid.
enum BsStatus bs_encoder_new(const struct BsConstraint *c,
                             const char *def,
                             struct BsEncoder **out_e);

// # Safety
// `e` must come from [`bs_encoder_new`] and not be used afterwards.
void bs_encoder_free(struct BsEncoder *e);

// Solves the stationarity LP at `(r,s,t)`; `relax = 0` means unrelaxed.
//
// # Safety
// `e` must be a live encoder handle and `out` valid.
enum BsStatus bs_compute_bounds(const struct BsEncoder *e,
                                int64_t r,
                                int64_t s,
                                int64_t t,
                                uint64_t relax,
                                struct BsBounds *out_b);

// Mean and standard error of the rate over `trials` sampled `m×n` arrays.
//
// # Safety
// `e` must be a live encoder handle and `out` valid.
enum BsStatus bs_empirical_rate(const struct BsEncoder *e,
                                uintptr_t m,
                                uintptr_t n,
                                uintptr_t trials,
                                uint64_t seed,
                                struct BsRate *out_r);

// Encodes `nbits` bits (one per byte, 0 or 1) into an `m×n` array written
// row-major to `values` (`m*n` bytes).
//
// # Safety
// `bits` must hold `nbits` bytes, `values` `m*n` bytes; the out pointers
// must be valid.
enum BsStatus bs_encode(const struct BsEncoder *e,
                        uintptr_t m,
                        uintptr_t n,
                        const uint8_t *bits,
                        uintptr_t nbits,
                        uint8_t *values,
                        uintptr_t *bits_consumed,
                        int *exhausted);

// Decodes a row-major `m×n` array into bits (one per byte). `nbits`
// receives the decoded length; fails with `InvalidArgument` if it exceeds
// `capacity`.
//
// # Safety
// `values` must hold `m*n` bytes and `bits` `capacity` bytes.
enum BsStatus bs_decode(const struct BsEncoder *e,
                        uintptr_t m,
                        uintptr_t n,
                        const uint8_t *values,
                        uint8_t *bits,
                        uintptr_t capacity,
                        uintptr_t *nbits);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BITSTUFF_H */
