#ifndef DCHSBM_H
#define DCHSBM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum DchsbmStatus {
  DCHSBM_STATUS_OK = 0,
  DCHSBM_STATUS_NULL_POINTER = 1,
  DCHSBM_STATUS_INVALID_ARGUMENT = 2,
  DCHSBM_STATUS_PARSE = 3,
  DCHSBM_STATUS_NUMERICAL = 4,
  DCHSBM_STATUS_IO = 5,
  DCHSBM_STATUS_PANIC = 6,
} DchsbmStatus;

// Clustering algorithm selector for [`dchsbm_cluster`].
typedef enum DchsbmAlgorithm {
  DCHSBM_ALGORITHM_KMEANS = 0,
  DCHSBM_ALGORITHM_THRESHOLD = 1,
} DchsbmAlgorithm;

// Opaque hypergraph handle.
typedef struct DchsbmHypergraph DchsbmHypergraph;

// Opaque model handle.
typedef struct DchsbmModel DchsbmModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer stays valid until the
// next failing call on the same thread.
const char *dchsbm_last_error(void);

// Parses the text hypergraph format (`n <n> edges <count>` header, one line of 1-based node
// ids per hyperedge).
//
// # Safety
// `text` must be a NUL-terminated string and `out` writable.
enum DchsbmStatus dchsbm_hypergraph_parse(const char *text, struct DchsbmHypergraph **out);

// Builds a hypergraph from `edge_count` hyperedges stored back to back in `nodes`
// (0-based ids), the i-th having `sizes[i]` entries.
//
// # Safety
// `sizes` must hold `edge_count` values and `nodes` their sum; `out` must be writable.
enum DchsbmStatus dchsbm_hypergraph_new(size_t n,
                                        const size_t *nodes,
                                        const size_t *sizes,
                                        size_t edge_count,
                                        struct DchsbmHypergraph **out);

// Releases a hypergraph. Null is ignored.
//
// # Safety
// `h` must come from this library and not be used afterwards.
void dchsbm_hypergraph_free(struct DchsbmHypergraph *h);

// # Safety
// `h` must be a live handle and `out` writable.
enum DchsbmStatus dchsbm_hypergraph_node_count(const struct DchsbmHypergraph *h, size_t *out);

// # Safety
// `h` must be a live handle and `out` writable.
enum DchsbmStatus dchsbm_hypergraph_edge_count(const struct DchsbmHypergraph *h, size_t *out);

// Writes hyperdegrees into `degrees`, which must have room for the node count.
//
// # Safety
// `h` must be a live handle and `degrees` hold `len` writable values.
enum DchsbmStatus dchsbm_hypergraph_degrees(const struct DchsbmHypergraph *h,
                                            uint64_t *degrees,
                                            size_t len);

// Serialises to the text format. Free the result with [`dchsbm_string_free`].
//
// # Safety
// `h` must be a live handle and `out` writable.
enum DchsbmStatus dchsbm_hypergraph_to_text(const struct DchsbmHypergraph *h, char **out);

// # Safety
// `s` must come from this library and not be used afterwards.
void dchsbm_string_free(char *s);

// Planted-partition model, validated on creation. `labels` are 0-based in `[0, k)`, `theta` has `n` entries summing
// to the block size within each block, `alpha` has `max_size - 1` entries for sizes
// `2..=max_size`.
//
// # Safety
// Arrays must hold the stated number of values; `out` must be writable.
enum DchsbmStatus dchsbm_model_planted(size_t n,
                                       size_t k,
                                       size_t max_size,
                                       double p,
                                       double q,
                                       const size_t *labels,
                                       const double *theta,
                                       const double *alpha,
                                       struct DchsbmModel **out);

// Releases a model. Null is ignored.
//
// # Safety
// `m` must come from this library and not be used afterwards.
void dchsbm_model_free(struct DchsbmModel *m);

// Probability of the hyperedge with the given 0-based nodes (any order, repeats allowed).
//
// # Safety
// `m` must be a live handle, `nodes` hold `len` values and `out` be writable.
enum DchsbmStatus dchsbm_model_edge_probability(const struct DchsbmModel *m,
                                                const size_t *nodes,
                                                size_t len,
                                                double *out);

// Draws a hypergraph from the model.
//
// # Safety
// `m` must be a live handle and `out` writable.
enum DchsbmStatus dchsbm_sample(const struct DchsbmModel *m,
                                uint64_t seed,
                                struct DchsbmHypergraph **out);

// Spectral clustering into `k` groups; writes 0-based labels into `labels` (`len` = node
// count).
//
// # Safety
// `h` must be a live handle and `labels` hold `len` writable values.
enum DchsbmStatus dchsbm_cluster(const struct DchsbmHypergraph *h,
                                 size_t k,
                                 enum DchsbmAlgorithm algorithm,
                                 uint64_t seed,
                                 size_t *labels,
                                 size_t len);

// Misclustered nodes between two labelings in `[0, k)` under the best label permutation.
//
// # Safety
// `g` and `g_prime` must hold `n` values and `out` be writable.
enum DchsbmStatus dchsbm_misclustering(const size_t *g,
                                       const size_t *g_prime,
                                       size_t n,
                                       size_t k,
                                       size_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DCHSBM_H */
