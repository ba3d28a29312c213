#include <math.h>
#include <stdio.h>
#include "acontract.h"

static int fail(const char *what) {
    char buf[256];
    ac_last_error_message(buf, sizeof buf);
    fprintf(stderr, "%s: %s\n", what, buf);
    return 1;
}

int main(void) {
    AcSystem *sys = NULL;
    if (ac_system_new_isentropic_euler(2.0, &sys) != AC_STATUS_OK) return fail("system");
    double u[2] = {1.0, 0.0}, f[2];
    if (ac_flux(sys, u, 2, f) != AC_STATUS_OK) return fail("flux");

    double ul[2] = {1.0, 1.4142135623730951};
    AcContext *ctx = NULL;
    if (ac_context_new(sys, ul, 2, AC_FAMILY_FIRST, 1e-2, 100.0, &ctx) != AC_STATUS_OK) return fail("context");
    double d = 0.0;
    if (ac_d_cont(ctx, ul, 2, &d) != AC_STATUS_OK) return fail("d_cont");

    double bad[2] = {-1.0, 0.0}, eta, q;
    AcStatus st = ac_entropy(sys, bad, 2, &eta, &q);

    printf("%.17g %.17g %.17g %d\n", f[0], f[1], d, (int)st);
    ac_context_free(ctx);
    ac_system_free(sys);
    return 0;
}
