#include <stdio.h>
#include "betacount.h"

int main(void) {
    BcBeta *beta = NULL;
    BcPoint *x = NULL;
    uint64_t count = 0;
    bool near = false;
    if (bc_beta_new_quadratic(1, 1, &beta) != BC_STATUS_OK ||
        bc_point_from_parts(beta, 1, 1, 0, 1, &x) != BC_STATUS_OK ||
        bc_count_prefixes(beta, x, 2, &count, &near) != BC_STATUS_OK) {
        fprintf(stderr, "%s\n", bc_last_error_message());
        return 1;
    }
    printf("N=%llu\n", (unsigned long long)count);
    if (bc_beta_new_float(3.0, 1e-10, &beta) != BC_STATUS_OK) {
        printf("%s\n", bc_last_error_message());
    }
    bc_point_free(x);
    bc_beta_free(beta);
    return 0;
}
