#ifndef CRANK_H
#define CRANK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CrankStatus {
  CRANK_STATUS_OK = 0,
  CRANK_STATUS_NOT_CONTAINED = 1,
  CRANK_STATUS_INVALID_ARGUMENT = 2,
  CRANK_STATUS_INDETERMINATE = 3,
  CRANK_STATUS_PARSE_ERROR = 4,
  CRANK_STATUS_LIMIT_EXCEEDED = 5,
  CRANK_STATUS_INVALID_CERTIFICATE = 6,
  CRANK_STATUS_PANIC = 7,
} CrankStatus;

typedef enum CrankFamily {
  CRANK_FAMILY_LADDER = 0,
  CRANK_FAMILY_CYCLE_CHAIN = 1,
  CRANK_FAMILY_TREE_CHAIN = 2,
  CRANK_FAMILY_CYLINDRICAL_GRID = 3,
} CrankFamily;

// Opaque digraph handle.
typedef struct CrankDigraph CrankDigraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses edge-list text into a new handle stored in `*out`.
//
// # Safety
// `text` must be a nul-terminated string and `out` a valid pointer.
enum CrankStatus crank_digraph_parse(const char *text, struct CrankDigraph **out);

// # Safety
// `g` must be null or a handle from this library not yet freed.
void crank_digraph_free(struct CrankDigraph *g);

// # Safety
// `g` must be null or a live handle.
size_t crank_digraph_vertex_count(const struct CrankDigraph *g);

// # Safety
// `g` must be null or a live handle.
size_t crank_digraph_edge_count(const struct CrankDigraph *g);

// Edge-list text of the digraph.
//
// # Safety
// `g` must be a live handle and `out` a valid pointer.
enum CrankStatus crank_digraph_to_edgelist(const struct CrankDigraph *g, char **out);

// Cycle rank into `*rank`. When `cert_out` is non-null it receives the
// certificate as JSON.
//
// # Safety
// `g` must be a live handle, `rank` valid, `cert_out` null or valid.
enum CrankStatus crank_cycle_rank(const struct CrankDigraph *g, size_t *rank, char **cert_out);

// Length of a longest directed cycle, 0 when acyclic.
//
// # Safety
// `g` must be a live handle and `out` valid.
enum CrankStatus crank_circumference(const struct CrankDigraph *g, size_t *out);

// Weak infinite coloring number.
//
// # Safety
// `g` must be a live handle and `out` valid.
enum CrankStatus crank_wcol_inf(const struct CrankDigraph *g, size_t *out);

// A new handle holding the member of `family` of the given order.
//
// # Safety
// `out` must be a valid pointer.
enum CrankStatus crank_generate(enum CrankFamily family, size_t order, struct CrankDigraph **out);

// Searches for a butterfly minor model of `pattern` in `host`. Returns
// `Ok` when found (writing the model certificate to `model_out` if
// non-null), `NotContained`, or `Indeterminate` when the budget ran out.
//
// # Safety
// `pattern` and `host` must be live handles, `model_out` null or valid.
enum CrankStatus crank_find_model(const struct CrankDigraph *pattern,
                                  const struct CrankDigraph *host,
                                  uint64_t budget,
                                  char **model_out);

// Verifies a JSON certificate against `g`. Returns `Ok` when it holds and
// `InvalidCertificate` otherwise, with the reason in the last error.
//
// # Safety
// `g` must be a live handle and `cert_json` a nul-terminated string.
enum CrankStatus crank_verify_certificate(const struct CrankDigraph *g, const char *cert_json);

// # Safety
// `s` must be null or a string returned by this library not yet freed.
void crank_string_free(char *s);

// Message for the last failed call on this thread, or null. Valid until
// the next call into the library from the same thread.
const char *crank_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CRANK_H */
