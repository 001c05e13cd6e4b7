#ifndef MPCCIP_H
#define MPCCIP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define MPCCIP_ALGORITHM_RELAXATION 0

#define MPCCIP_ALGORITHM_PENALTY 1

#define MPCCIP_STATUS_SUCCESS 0

#define MPCCIP_STATUS_MAX_ITER 1

#define MPCCIP_STATUS_RESTORATION_FAILED 2

#define MPCCIP_STATUS_DIVERGED 3

#define MPCCIP_STATUS_PENALTY_SATURATED 4

#define MPCCIP_STATUS_STALLED 5

#define MPCCIP_STATUS_FAILURE 6

typedef int MpccipCode;

typedef uint64_t MpccipHandle;

/**
 * Scalar fields of the last solve.
 */
typedef struct MpccipResult {
  /**
   * One of the `MPCCIP_STATUS_*` values.
   */
  int status;
  double objective;
  double kkt_error;
  double stationarity;
  double constraint_violation;
  /**
   * `‖X1 x2‖∞` at the solution.
   */
  double comp;
  uint64_t iterations;
  uint64_t factorizations;
  uint64_t restorations;
  uint64_t n;
} MpccipResult;

#define MPCCIP_OK 0

/**
 * The solve ran but ended without success; the result is still readable.
 */
#define MPCCIP_NOT_CONVERGED 1

#define MPCCIP_ERR_INVALID_ARGUMENT -1

/**
 * Inconsistent shapes, asymmetric `Q`, bad pairs.
 */
#define MPCCIP_ERR_INVALID_PROBLEM -2

#define MPCCIP_ERR_UNKNOWN_OPTION -3

#define MPCCIP_ERR_INVALID_OPTION_VALUE -4

/**
 * Unknown or already released handle.
 */
#define MPCCIP_ERR_INVALID_HANDLE -5

/**
 * No result yet: `mpccip_solve` has not run on this handle.
 */
#define MPCCIP_ERR_NO_RESULT -6

#define MPCCIP_ERR_SOLVER -7

#define MPCCIP_ERR_BUFFER_TOO_SMALL -8

#define MPCCIP_ERR_PANIC -99

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a QPCC `min ½xᵀQx + qᵀx + constant  s.t.  lg <= Ax <= ug,
 * lx <= x <= ux,  x[pairs[2k]] ⊥ x[pairs[2k+1]]` from dense row-major
 * arrays: `q_matrix` is `n×n` and symmetric, `a` is `m×n` (may be null when
 * `m == 0`). Bound arrays may be null (no bounds); infinite entries are
 * absent bounds. Both members of a pair need a finite lower bound.
 *
 * # Safety
 * Every non-null pointer must reference at least the stated number of
 * elements; `out_handle` must be writable.
 */
MpccipCode mpccip_create_qpcc(size_t n,
                              const double *q_matrix,
                              const double *q,
                              double constant,
                              size_t m,
                              const double *a,
                              const double *lg,
                              const double *ug,
                              const double *lx,
                              const double *ux,
                              size_t n_cc,
                              const uint64_t *pairs,
                              MpccipHandle *out_handle);

/**
 * Like [`mpccip_create_qpcc`] with `Q` and `A` in coordinate form
 * (`rows`, `cols`, `vals` of length `nnz`; duplicates sum).
 *
 * # Safety
 * As for [`mpccip_create_qpcc`].
 */
MpccipCode mpccip_create_qpcc_coo(size_t n,
                                  size_t q_nnz,
                                  const uint64_t *q_rows,
                                  const uint64_t *q_cols,
                                  const double *q_vals,
                                  const double *q,
                                  double constant,
                                  size_t m,
                                  size_t a_nnz,
                                  const uint64_t *a_rows,
                                  const uint64_t *a_cols,
                                  const double *a_vals,
                                  const double *lg,
                                  const double *ug,
                                  const double *lx,
                                  const double *ux,
                                  size_t n_cc,
                                  const uint64_t *pairs,
                                  MpccipHandle *out_handle);

/**
 * Releases a handle. Releasing twice reports an invalid handle.
 */
MpccipCode mpccip_destroy(MpccipHandle handle);

/**
 * Sets the initial point, in the order the variables were given; `len`
 * must equal `n`. Without one the solver picks its default start.
 *
 * # Safety
 * `x` must reference `len` doubles.
 */
MpccipCode mpccip_set_initial_point(MpccipHandle handle, const double *x, size_t len);

/**
 * Sets option `key` to `value`, as the command line's `--set key=value`.
 *
 * # Safety
 * `key` and `value` must be nul-terminated strings.
 */
MpccipCode mpccip_set_option(MpccipHandle handle, const char *key, const char *value);

/**
 * Solves with `algorithm` (`MPCCIP_ALGORITHM_*`), followed by crossover
 * when `crossover` is non-zero. Returns [`MPCCIP_OK`] on success and
 * [`MPCCIP_NOT_CONVERGED`] when the solver stopped otherwise; either way
 * the result can be read afterwards.
 */
MpccipCode mpccip_solve(MpccipHandle handle, int algorithm, int crossover);

/**
 * Copies the scalar fields of the last solve into `out`.
 *
 * # Safety
 * `out` must be writable.
 */
MpccipCode mpccip_get_result(MpccipHandle handle, struct MpccipResult *out);

/**
 * Copies the solution, in the order the variables were given, into
 * `x[0..len]`; `len` must be at least `n`.
 *
 * # Safety
 * `x` must reference `len` writable doubles.
 */
MpccipCode mpccip_get_x(MpccipHandle handle, double *x, size_t len);

/**
 * Message of the last failed call on this thread (empty if none). The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *mpccip_last_error(void);

/**
 * Library version as a static string.
 */
const char *mpccip_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MPCCIP_H */
