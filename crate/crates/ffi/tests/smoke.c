#include <math.h>
#include <stdio.h>
#include "branchkit.h"

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "failed: %s (%s)\n", #cond, bk_last_error_message()); return 1; } } while (0)

int main(void) {
    BkGraph *g = NULL;
    CHECK(bk_graph_pareto(600, 2.5, 10.0, 3, &g) == BK_STATUS_OK);
    CHECK(bk_graph_num_vertices(g) == 600);

    BkReplicates *r = NULL;
    CHECK(bk_replicates_perturb(g, -1.0, 0.1, 3, 4, &r) == BK_STATUS_OK);
    BkEstimatorConfig cfg = bk_estimator_config_default();
    cfg.n_bootstrap = 100;
    BkEstimate est;
    CHECK(bk_estimate(r, &cfg, 5, &est) == BK_STATUS_OK);
    CHECK(est.ci_lo <= est.kappa_hat && est.kappa_hat <= est.ci_hi);

    BkThresholds t;
    CHECK(bk_thresholds(3.0, 0.0, 1.0, 0.95, &t) == BK_STATUS_OK);
    CHECK(t.percolation.value == 0.5);
    CHECK(bk_thresholds(1.0, 0.0, 1.0, 0.95, &t) == BK_STATUS_OK);
    CHECK(t.subcritical && isnan(t.percolation.value));

    CHECK(bk_graph_erdos_renyi(10, 2.0, 1, &g) == BK_STATUS_INVALID_PARAMETER);
    CHECK(bk_last_error_message() != NULL);

    printf("kappa_hat=%.6f\n", est.kappa_hat);
    bk_replicates_free(r);
    bk_graph_free(g);
    return 0;
}
