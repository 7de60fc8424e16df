#ifndef TRIPLEX_H
#define TRIPLEX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TriplexStatus {
  TRIPLEX_STATUS_OK = 0,
  TRIPLEX_STATUS_NULL_POINTER = 1,
  TRIPLEX_STATUS_INVALID_ARGUMENT = 2,
  TRIPLEX_STATUS_IO = 3,
  TRIPLEX_STATUS_FORMAT = 4,
  TRIPLEX_STATUS_COMPUTE = 5,
  TRIPLEX_STATUS_PANIC = 6,
} TriplexStatus;

/**
 * Row-major matrix of points with one id per row.
 */
typedef struct TriplexMatrix TriplexMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Owned by the library.
 */
const char *triplex_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *triplex_version(void);

/**
 * Copies `rows * dim` doubles into a new matrix. Free with [`triplex_matrix_free`].
 *
 * # Safety
 * `data` must point to `rows * dim` readable doubles; `out` must be writable.
 */
enum TriplexStatus triplex_matrix_from_rows(const double *data,
                                            size_t rows,
                                            size_t dim,
                                            struct TriplexMatrix **out);

/**
 * Reads an embedding matrix file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum TriplexStatus triplex_matrix_load(const char *path, struct TriplexMatrix **out);

/**
 * Writes the matrix as an embedding file; rows are l2-normalized on the way out.
 *
 * # Safety
 * `m` must come from this library; `path` must be a NUL-terminated string.
 */
enum TriplexStatus triplex_matrix_save(const struct TriplexMatrix *m, const char *path);

/**
 * Row count, or 0 for NULL.
 *
 * # Safety
 * `m` must be NULL or come from this library.
 */
size_t triplex_matrix_rows(const struct TriplexMatrix *m);

/**
 * Column count, or 0 for NULL.
 *
 * # Safety
 * `m` must be NULL or come from this library.
 */
size_t triplex_matrix_dim(const struct TriplexMatrix *m);

/**
 * Copies row `row` into `out` (`dim` doubles).
 *
 * # Safety
 * `m` must come from this library; `out` must hold `dim` doubles.
 */
enum TriplexStatus triplex_matrix_row(const struct TriplexMatrix *m, size_t row, double *out);

/**
 * Releases a matrix. NULL is ignored.
 *
 * # Safety
 * `m` must be NULL or a matrix from this library not yet freed.
 */
void triplex_matrix_free(struct TriplexMatrix *m);

/**
 * KMeans with k-means++ seeding and 10 restarts. Writes one label per row.
 *
 * # Safety
 * `m` must come from this library; `labels_out` must hold one `int64_t` per
 * row; `objective_out` may be NULL.
 */
enum TriplexStatus triplex_kmeans(const struct TriplexMatrix *m,
                                  size_t k,
                                  uint64_t seed,
                                  int64_t *labels_out,
                                  double *objective_out);

/**
 * Diagonal-covariance GMM; the objective is the mean log-likelihood.
 *
 * # Safety
 * As for [`triplex_kmeans`].
 */
enum TriplexStatus triplex_gmm(const struct TriplexMatrix *m,
                               size_t k,
                               uint64_t seed,
                               int64_t *labels_out,
                               double *objective_out);

/**
 * HDBSCAN; noise rows get -1. `min_samples` 0 means `min_cluster_size`.
 *
 * # Safety
 * `m` must come from this library; `labels_out` must hold one `int64_t` per
 * row; the scalar outputs may be NULL.
 */
enum TriplexStatus triplex_hdbscan(const struct TriplexMatrix *m,
                                   size_t min_cluster_size,
                                   size_t min_samples,
                                   int64_t *labels_out,
                                   size_t *n_clusters_out,
                                   double *noise_fraction_out);

/**
 * Adjusted Rand index of two labelings of length `n`.
 *
 * # Safety
 * `a` and `b` must hold `n` values; `out` must be writable.
 */
enum TriplexStatus triplex_ari(const int64_t *a, const int64_t *b, size_t n, double *out);

/**
 * Normalized mutual information (arithmetic normalization).
 *
 * # Safety
 * As for [`triplex_ari`].
 */
enum TriplexStatus triplex_nmi(const int64_t *a, const int64_t *b, size_t n, double *out);

/**
 * Mean silhouette with Euclidean distances; -1 labels form their own group.
 *
 * # Safety
 * `m` must come from this library; `labels` must hold one value per row.
 */
enum TriplexStatus triplex_silhouette(const struct TriplexMatrix *m,
                                      const int64_t *labels,
                                      double *out);

/**
 * Gives every target row the label of its most cosine-similar source row.
 *
 * # Safety
 * Both matrices must come from this library; `source_labels` must hold one
 * value per source row and `labels_out` one per target row;
 * `similarity_out` may be NULL or hold one double per target row.
 */
enum TriplexStatus triplex_propagate(const struct TriplexMatrix *source,
                                     const int64_t *source_labels,
                                     const struct TriplexMatrix *target,
                                     int64_t *labels_out,
                                     double *similarity_out);

/**
 * Lowercases and collapses whitespace. Free the result with [`triplex_string_free`].
 *
 * # Safety
 * `raw` must be a NUL-terminated UTF-8 string; `out` must be writable.
 */
enum TriplexStatus triplex_clean_text(const char *raw, char **out);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must be NULL or a string from this library not yet freed.
 */
void triplex_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRIPLEX_H */
