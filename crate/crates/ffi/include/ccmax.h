#ifndef CCMAX_H
#define CCMAX_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/*
 Result of every fallible call.
 */
typedef enum CcmaxStatus {
  CCMAX_STATUS_OK = 0,
  CCMAX_STATUS_NULL_POINTER = 1,
  CCMAX_STATUS_DOMAIN = 2,
  CCMAX_STATUS_PARSE = 3,
  CCMAX_STATUS_GUARD = 4,
  CCMAX_STATUS_INVALID = 5,
  CCMAX_STATUS_IO = 6,
  CCMAX_STATUS_BUFFER_TOO_SMALL = 7,
  CCMAX_STATUS_PANIC = 8,
} CcmaxStatus;

/*
 Problem family for curve queries.
 */
typedef enum CcmaxCurve {
  CCMAX_CURVE_CUT = 0,
  CCMAX_CURVE_VC = 1,
  CCMAX_CURVE_TWO_SAT = 2,
} CcmaxCurve;

/*
 Opaque parsed instance.
 */
typedef struct CcmaxInstance CcmaxInstance;

/*
 Opaque relaxation solution.
 */
typedef struct CcmaxSdpSolution CcmaxSdpSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *ccmax_version(void);

/*
 Message for the last failed call on this thread; empty after a success.
 The pointer stays valid until the next ccmax call on this thread.
 */
const char *ccmax_last_error_message(void);

/*
 Γ_ρ(x, y) = P[X ≤ Φ⁻¹(x), Y ≤ Φ⁻¹(y)] for ρ-correlated standard normals.

 # Safety
 `out` must be valid for a write of `double`.
 */
enum CcmaxStatus ccmax_gamma(double rho, double x, double y, double *out);

/*
 Approximation ratio α_cut(q) of threshold rounding at cardinality q.

 # Safety
 `out` must be valid for a write of `double`.
 */
enum CcmaxStatus ccmax_alpha_cut(double q, double *out);

/*
 Approximation ratio α_2sat(q) for q < 1/2.

 # Safety
 `out` must be valid for a write of `double`.
 */
enum CcmaxStatus ccmax_alpha_2sat(double q, double *out);

/*
 Hardness ratio at (q, ρ) for `Cut` or `Vc`; `TwoSat` is rejected.

 # Safety
 `out` must be valid for a write of `double`.
 */
enum CcmaxStatus ccmax_beta(enum CcmaxCurve curve, double q, double rho, double *out);

/*
 Unflattened hardness at q: the infimum over admissible ρ and its minimizer.

 # Safety
 `value` and `rho_star` must be valid for writes of `double`.
 */
enum CcmaxStatus ccmax_hardness(enum CcmaxCurve curve, double q, double *value, double *rho_star);

/*
 Parse an instance from its text form.

 # Safety
 `text` must be a NUL-terminated string; `out` valid for a pointer write.
 */
enum CcmaxStatus ccmax_instance_parse(const char *text, struct CcmaxInstance **out);

/*
 Release an instance. Null is ignored.

 # Safety
 `inst` must be null or a handle from `ccmax_instance_parse` not yet freed.
 */
void ccmax_instance_free(struct CcmaxInstance *inst);

/*
 Variable count and cardinality of an instance.

 # Safety
 `inst` must be a live handle; `n` and `k` valid for writes.
 */
enum CcmaxStatus ccmax_instance_dims(const struct CcmaxInstance *inst, size_t *n, size_t *k);

/*
 Weight of the satisfied constraints under `signs` (+1 true, -1 false).

 # Safety
 `inst` must be a live handle; `signs` valid for `len` reads.
 */
enum CcmaxStatus ccmax_instance_evaluate(const struct CcmaxInstance *inst,
                                         const int8_t *signs,
                                         size_t len,
                                         double *out);

/*
 Exact optimum by enumeration; refused with `Guard` above 28 variables.

 # Safety
 `inst` must be a live handle; `assignment` valid for `len` writes.
 */
enum CcmaxStatus ccmax_instance_brute_force(const struct CcmaxInstance *inst,
                                            int8_t *assignment,
                                            size_t len,
                                            double *value);

/*
 Solve the vector relaxation with `restarts` seeded restarts.

 # Safety
 `inst` must be a live handle; `out` valid for a pointer write.
 */
enum CcmaxStatus ccmax_sdp_solve(const struct CcmaxInstance *inst,
                                 size_t restarts,
                                 uint64_t seed,
                                 struct CcmaxSdpSolution **out);

/*
 Release a solution. Null is ignored.

 # Safety
 `sol` must be null or a handle from `ccmax_sdp_solve` not yet freed.
 */
void ccmax_sdp_free(struct CcmaxSdpSolution *sol);

/*
 Objective value with its worst residual; `converged` reports solver status.

 # Safety
 `sol` must be a live handle; out-pointers valid for writes.
 */
enum CcmaxStatus ccmax_sdp_summary(const struct CcmaxSdpSolution *sol,
                                   double *objective,
                                   double *max_residual,
                                   bool *converged);

/*
 Bias μ_i of variable `i` (0-based).

 # Safety
 `sol` must be a live handle; `out` valid for a write.
 */
enum CcmaxStatus ccmax_sdp_mu(const struct CcmaxSdpSolution *sol, size_t i, double *out);

/*
 Best-of-`rounds` threshold rounding with cardinality repair.

 # Safety
 Handles must be live; `assignment` valid for `len` writes.
 */
enum CcmaxStatus ccmax_round(const struct CcmaxInstance *inst,
                             const struct CcmaxSdpSolution *sol,
                             size_t rounds,
                             uint64_t seed,
                             int8_t *assignment,
                             size_t len,
                             double *value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CCMAX_H */
