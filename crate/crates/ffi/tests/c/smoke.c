#include <math.h>
#include <stdio.h>
#include "ccmax.h"

static const char *CYCLE =
    "ccmax v1\nproblem cut\nvars 4\ncard 2\n"
    "c 1 2 1 x-\nc 2 3 1 x-\nc 3 4 1 x-\nc 4 1 1 x-\n";

int main(void) {
    double g = 0.0;
    if (ccmax_gamma(-1.0, 0.7, 0.6, &g) != CCMAX_STATUS_OK || fabs(g - 0.3) > 1e-12) return 1;
    if (ccmax_gamma(2.0, 0.5, 0.5, &g) != CCMAX_STATUS_DOMAIN) return 2;
    if (ccmax_last_error_message()[0] == '\0') return 3;

    CcmaxInstance *inst = NULL;
    if (ccmax_instance_parse(CYCLE, &inst) != CCMAX_STATUS_OK) return 4;
    int8_t signs[4];
    double opt = 0.0;
    if (ccmax_instance_brute_force(inst, signs, 4, &opt) != CCMAX_STATUS_OK || opt != 4.0) return 5;

    CcmaxSdpSolution *sol = NULL;
    if (ccmax_sdp_solve(inst, 2, 1, &sol) != CCMAX_STATUS_OK) return 6;
    double value = 0.0;
    if (ccmax_round(inst, sol, 20, 1, signs, 4, &value) != CCMAX_STATUS_OK || value != 4.0) return 7;
    ccmax_sdp_free(sol);
    ccmax_instance_free(inst);
    printf("ok %s\n", ccmax_version());
    return 0;
}
