#include <math.h>
#include <stdio.h>
#include "hormander.h"

int main(void) {
    double re, im;
    if (hm_gamma(4.0, 0.0, &re, &im) != HM_STATUS_OK || fabs(re - 6.0) > 1e-10) return 1;
    if (hm_gamma(0.0, 0.0, &re, &im) != HM_STATUS_POLE || hm_last_error() == NULL) return 2;

    HmOperator *op = NULL;
    if (hm_operator_preset("diag:(1,2,4)", &op) != HM_STATUS_OK) return 3;
    if (hm_operator_dim(op) != 3) return 4;
    double buf[18];
    if (hm_imaginary_power(op, 0.0, buf, 18) != HM_STATUS_OK) return 5;
    if (fabs(buf[0] - 1.0) > 1e-12 || fabs(buf[2]) > 1e-12) return 6;
    hm_operator_free(op);
    printf("ok %s\n", hm_version());
    return 0;
}
