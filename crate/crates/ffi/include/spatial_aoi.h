#ifndef SPATIAL_AOI_H
#define SPATIAL_AOI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AoiPolicyKind {
  /**
   * Weighted sum; `weights` may be null for unit weights.
   */
  AOI_POLICY_KIND_EWS = 0,
  AOI_POLICY_KIND_MIN_MAX = 1,
  AOI_POLICY_KIND_PROPORTIONAL_FAIR = 2,
  AOI_POLICY_KIND_TOPOLOGY_AGNOSTIC = 3,
  /**
   * Uniform attempt probability; `aloha_p <= 0` selects `1/N`.
   */
  AOI_POLICY_KIND_ALOHA = 4,
} AoiPolicyKind;

/**
 * Result codes. Values 2 to 4 match the command line exit codes.
 */
typedef enum AoiStatus {
  AOI_STATUS_OK = 0,
  AOI_STATUS_NULL_POINTER = 1,
  AOI_STATUS_USAGE = 2,
  AOI_STATUS_NO_CONVERGENCE = 3,
  AOI_STATUS_IO = 4,
  AOI_STATUS_PANIC = 5,
} AoiStatus;

/**
 * Opaque network geometry.
 */
typedef struct AoiTopology AoiTopology;

/**
 * Convergence details of [`aoi_solve`]. Closed-form policies report
 * `converged = true`, `sweeps = 0` and `residual = 0`.
 */
typedef struct AoiSolveInfo {
  double residual;
  size_t sweeps;
  bool converged;
} AoiSolveInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a topology from `n` normalized distances in `(0, 1]`.
 *
 * # Safety
 * `distances` must point to `n` doubles and `out` must be writable.
 */
enum AoiStatus aoi_topology_new(const double *distances,
                                size_t n,
                                double beta,
                                double theta,
                                struct AoiTopology **out);

/**
 * Samples `n` nodes uniformly in the unit disk (`beta = 2`, `theta = 1`).
 *
 * # Safety
 * `out` must be writable.
 */
enum AoiStatus aoi_topology_sample(size_t n, uint64_t seed, struct AoiTopology **out);

/**
 * Reads a topology JSON file `{"beta", "theta", "distances"}`.
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` must be writable.
 */
enum AoiStatus aoi_topology_read_json(const char *path, struct AoiTopology **out);

/**
 * Releases a topology. Null is ignored.
 *
 * # Safety
 * `t` must come from an `aoi_topology_*` constructor and not be used again.
 */
void aoi_topology_free(struct AoiTopology *t);

/**
 * Number of nodes, or 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
size_t aoi_topology_len(const struct AoiTopology *t);

/**
 * `d_ij = r_j^beta / (r_i^beta theta)`.
 *
 * # Safety
 * `t` must be a live handle and `out` writable.
 */
enum AoiStatus aoi_interference_ratio(const struct AoiTopology *t, size_t i, size_t j, double *out);

/**
 * Per-node success probabilities of the policy `probs`.
 *
 * # Safety
 * `probs` and `tau_out` must each hold `n` doubles.
 */
enum AoiStatus aoi_success_probabilities(const struct AoiTopology *t,
                                         const double *probs,
                                         size_t n,
                                         double *tau_out);

/**
 * Per-node expected AoI `1 / tau_i` (infinite where `tau_i = 0`).
 *
 * # Safety
 * `probs` and `aoi_out` must each hold `n` doubles.
 */
enum AoiStatus aoi_expected_aoi(const struct AoiTopology *t,
                                const double *probs,
                                size_t n,
                                double *aoi_out);

/**
 * Computes a policy of the given kind with default solver settings and
 * writes its `n` probabilities to `probs_out`. `info_out` may be null.
 *
 * # Safety
 * `weights` must be null or hold `n` doubles; `probs_out` must hold `n`.
 */
enum AoiStatus aoi_solve(const struct AoiTopology *t,
                         enum AoiPolicyKind kind,
                         const double *weights,
                         double aloha_p,
                         double *probs_out,
                         size_t n,
                         struct AoiSolveInfo *info_out);

/**
 * Topology-agnostic probability for a node at `radius` in an `n`-node network.
 *
 * # Safety
 * `out` must be writable.
 */
enum AoiStatus aoi_solve_ta(size_t n, double radius, double *out);

/**
 * Simulates `replications` runs of `horizon` slots and writes the pooled
 * per-node success rate and time-average AoI. Either output may be null.
 *
 * # Safety
 * `probs` must hold `n` doubles; non-null outputs must hold `n` doubles.
 */
enum AoiStatus aoi_simulate(const struct AoiTopology *t,
                            const double *probs,
                            size_t n,
                            uint64_t horizon,
                            size_t replications,
                            uint64_t seed,
                            double *tau_hat_out,
                            double *aoi_hat_out);

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library from the same thread.
 */
const char *aoi_last_error_message(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *aoi_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPATIAL_AOI_H */
