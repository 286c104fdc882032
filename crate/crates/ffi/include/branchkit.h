#ifndef BRANCHKIT_H
#define BRANCHKIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BkStatus {
  BK_STATUS_OK = 0,
  BK_STATUS_NULL_POINTER = 1,
  BK_STATUS_INVALID_PARAMETER = 2,
  BK_STATUS_DATA_ERROR = 3,
  BK_STATUS_NON_CONVERGENCE = 4,
  BK_STATUS_IO = 5,
  BK_STATUS_PANIC = 6,
} BkStatus;

// Opaque graph handle.
typedef struct BkGraph BkGraph;

// Opaque handle to a set of replicate observations on one vertex set.
typedef struct BkReplicates BkReplicates;

// Estimator settings. A NaN `alpha0` starts the fixed point from `û₂`.
typedef struct BkEstimatorConfig {
  double alpha0;
  double epsilon;
  size_t max_iterations;
  size_t n_bootstrap;
  double confidence_level;
} BkEstimatorConfig;

typedef struct BkEstimate {
  size_t n;
  double alpha_hat;
  double beta_hat;
  double delta_hat;
  double kappa_hat;
  double variance_hat;
  double ci_lo;
  double ci_hi;
  double alpha_ci_lo;
  double alpha_ci_hi;
  double beta_ci_lo;
  double beta_ci_hi;
  size_t iterations;
  // Number of estimator warnings (clamped radicands, extra replicates).
  size_t n_warnings;
} BkEstimate;

// A derived quantity with its delta-method variance and interval. All
// fields are NaN when the quantity does not exist.
typedef struct BkDerived {
  double value;
  double variance;
  double ci_lo;
  double ci_hi;
} BkDerived;

typedef struct BkThresholds {
  bool subcritical;
  struct BkDerived percolation;
  struct BkDerived epidemic;
  struct BkDerived immunization;
} BkThresholds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer is
// valid until the next failing call on the same thread.
const char *bk_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *bk_version(void);

// Graph on `n` vertices with edges `(src[k], dst[k])`, `k < m`.
//
// # Safety
// `src` and `dst` point to `m` readable values (either may be NULL when
// `m == 0`); `out` is valid for writes.
enum BkStatus bk_graph_from_edges(size_t n,
                                  const uint32_t *src,
                                  const uint32_t *dst,
                                  size_t m,
                                  struct BkGraph **out);

// Erdős–Rényi graph drawn from the `GENERATE` stream of `seed`.
//
// # Safety
// `out` is valid for writes.
enum BkStatus bk_graph_erdos_renyi(size_t n, double p, uint64_t seed, struct BkGraph **out);

// # Safety
// `out` is valid for writes.
enum BkStatus bk_graph_preferential_attachment(size_t n,
                                               size_t m,
                                               uint64_t seed,
                                               struct BkGraph **out);

// Erased configuration model on truncated-Pareto degrees with the given
// shape and target mean degree.
//
// # Safety
// `out` is valid for writes.
enum BkStatus bk_graph_pareto(size_t n,
                              double zeta,
                              double mean_degree,
                              uint64_t seed,
                              struct BkGraph **out);

// Reads a canonical or labeled edge list. A negative `weight_threshold`
// disables thresholding.
//
// # Safety
// `path` is a NUL-terminated string; `out` is valid for writes.
enum BkStatus bk_graph_read(const char *path, double weight_threshold, struct BkGraph **out);

// # Safety
// `g` is NULL or a handle not yet freed.
void bk_graph_free(struct BkGraph *g);

// # Safety
// `g` is a live handle.
size_t bk_graph_num_vertices(const struct BkGraph *g);

// # Safety
// `g` is a live handle.
size_t bk_graph_num_edges(const struct BkGraph *g);

// `Σd² / Σd`, 0 for an edgeless graph.
//
// # Safety
// `g` is a live handle; `out` is valid for writes.
enum BkStatus bk_graph_branching_factor(const struct BkGraph *g, double *out);

// `k` independent noisy observations of `g`. A negative `alpha` selects the
// edge-unbiased rate for `beta`.
//
// # Safety
// `g` is a live handle; `out` is valid for writes.
enum BkStatus bk_replicates_perturb(const struct BkGraph *g,
                                    double alpha,
                                    double beta,
                                    size_t k,
                                    uint64_t seed,
                                    struct BkReplicates **out);

// Copies `k` graphs into a replicate set. The graph handles stay owned by
// the caller.
//
// # Safety
// `graphs` points to `k` live handles; `out` is valid for writes.
enum BkStatus bk_replicates_from_graphs(const struct BkGraph *const *graphs,
                                        size_t k,
                                        struct BkReplicates **out);

// # Safety
// `r` is a live handle.
size_t bk_replicates_len(const struct BkReplicates *r);

// # Safety
// `r` is NULL or a handle not yet freed.
void bk_replicates_free(struct BkReplicates *r);

struct BkEstimatorConfig bk_estimator_config_default(void);

// Error rates, κ̂ and their intervals from the first three replicates.
// A NULL `cfg` uses the defaults.
//
// # Safety
// `r` is a live handle; `cfg` is NULL or readable; `out` is valid for writes.
enum BkStatus bk_estimate(const struct BkReplicates *r,
                          const struct BkEstimatorConfig *cfg,
                          uint64_t seed,
                          struct BkEstimate *out);

// `R₀ = θ(κ-1)/(θ+γ)` with its delta-method interval.
//
// # Safety
// `out` is valid for writes.
enum BkStatus bk_reproduction_number(double kappa,
                                     double var_kappa,
                                     double theta,
                                     double gamma,
                                     double level,
                                     struct BkDerived *out);

// # Safety
// `out` is valid for writes.
enum BkStatus bk_thresholds(double kappa,
                            double var_kappa,
                            double lambda,
                            double level,
                            struct BkThresholds *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BRANCHKIT_H */
