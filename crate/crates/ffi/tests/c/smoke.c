#include <math.h>
#include <stdio.h>
#include <string.h>

#include "asq.h"

#define CHECK(cond)                                                   \
    do {                                                              \
        if (!(cond)) {                                                \
            fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(void) {
    AsqDeviceParams p = {0.2, 0.3, 0.82, 0.63, 10.0, 0.2, 0.0, 0.0};
    AsqDevice *dev = NULL;
    CHECK(asq_device_new(&p, &dev) == ASQ_STATUS_OK);

    double j = 0.0;
    AsqConvention conv;
    CHECK(asq_coupling(dev, ASQ_METHOD_NUMERIC, 0.0, 0.5, &j, &conv) == ASQ_STATUS_OK);
    CHECK(conv == ASQ_CONVENTION_EIGENENERGY);
    CHECK(fabs(j / 104.36 - 1.0) < 0.02);

    double f01[4];
    CHECK(asq_transmon_f01(dev, 0.25, 0.5, 40, f01) == ASQ_STATUS_OK);
    CHECK(f01[0] > 1.0 && f01[0] < 10.0);

    CHECK(asq_coupling(NULL, ASQ_METHOD_NUMERIC, 0.0, 0.5, &j, NULL) == ASQ_STATUS_NULL_POINTER);
    CHECK(asq_last_error() != NULL && strstr(asq_last_error(), "device") != NULL);

    AsqDrive drive = {2.0, 0.0, -178.0, 0.0, 178.0};
    AsqRates rates = {1000.0, 1000.0, 1.0, 1.0};
    double pop[4];
    CHECK(asq_steady_state(&drive, &rates, pop) == ASQ_STATUS_OK);
    CHECK(fabs(pop[0] - 0.5) < 0.02 && fabs(pop[2] - 0.5) < 0.02);

    asq_device_free(dev);
    printf("ok %s\n", asq_version());
    return 0;
}
