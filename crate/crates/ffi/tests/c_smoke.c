#include <math.h>
#include <stdio.h>
#include <string.h>

#include "triplex.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        TriplexStatus s_ = (call);                                         \
        if (s_ != TRIPLEX_STATUS_OK) {                                     \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_,              \
                    triplex_last_error() ? triplex_last_error() : "?");    \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    const double pts[] = {0.0, 0.0, 0.1, 0.0, 5.0, 5.0, 5.1, 5.0};
    TriplexMatrix *m = NULL;
    int64_t labels[4];
    double inertia = 0.0, score = 0.0;
    const int64_t truth[] = {0, 0, 1, 1};

    CHECK(triplex_matrix_from_rows(pts, 4, 2, &m));
    CHECK(triplex_kmeans(m, 2, 42, labels, &inertia));
    CHECK(triplex_ari(truth, labels, 4, &score));
    if (fabs(score - 1.0) > 1e-12) {
        fprintf(stderr, "ari %f\n", score);
        return 1;
    }
    if (triplex_kmeans(m, 9, 42, labels, NULL) != TRIPLEX_STATUS_INVALID_ARGUMENT) {
        return 1;
    }
    triplex_matrix_free(m);

    char *clean = NULL;
    CHECK(triplex_clean_text("Hello   World", &clean));
    if (strcmp(clean, "hello world") != 0) {
        return 1;
    }
    triplex_string_free(clean);
    printf("ok %s\n", triplex_version());
    return 0;
}
