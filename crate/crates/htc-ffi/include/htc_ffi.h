#ifndef HTC_FFI_H
#define HTC_FFI_H

/* C ABI for the half-trek identifiability library.
 *
 * Maintained to match crates/htc-ffi/src/lib.rs; regenerate with cbindgen
 * (configuration in cbindgen.toml) when the surface changes.
 */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

#define HTC_OK 0

#define HTC_ERR_PARSE 1

#define HTC_ERR_CAPABILITY 2

#define HTC_ERR_NONGENERIC 3

#define HTC_ERR_ARGUMENT 4

/**
 * Opaque mixed-graph handle.
 */
typedef struct HtcGraph HtcGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses the textual graph format into a new handle stored in `out`.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer;
 * on success the caller owns the handle and must release it with
 * `htc_graph_free`.
 */
int htc_graph_parse(const char *text, struct HtcGraph **out);

/**
 * Releases a graph handle. Null is a no-op.
 *
 * # Safety
 * `graph` must be null or a handle returned by `htc_graph_parse` that has
 * not been freed yet.
 */
void htc_graph_free(struct HtcGraph *graph);

/**
 * Number of nodes, or -1 for a null handle.
 *
 * # Safety
 * `graph` must be null or a live handle from `htc_graph_parse`.
 */
int htc_graph_node_count(const struct HtcGraph *graph);

/**
 * Classifies the graph and returns the JSON classification record
 * (`verdict`, `solved_nodes`, `witness`). Null on error.
 *
 * # Safety
 * `graph` must be a live handle from `htc_graph_parse`. The returned
 * string must be released with `htc_string_free`.
 */
char *htc_classify_json(const struct HtcGraph *graph);

/**
 * Classifies the graph together with its mixed components (acyclic graphs
 * only) and returns the JSON record extended with a `decomposition` field.
 * Null on error (for instance on cyclic input).
 *
 * # Safety
 * As for `htc_classify_json`.
 */
char *htc_classify_decomposed_json(const struct HtcGraph *graph);

/**
 * Runs the G-criterion check: 1 identifiable, 0 not, negative error code
 * otherwise (cyclic input or more than 7 nodes).
 *
 * # Safety
 * `graph` must be a live handle from `htc_graph_parse`.
 */
int htc_gc_identifiable(const struct HtcGraph *graph);

/**
 * Returns the calling thread's last error message, or null if none was
 * recorded. The caller owns the string.
 *
 * # Safety
 * The returned string must be released with `htc_string_free`.
 */
char *htc_last_error_message(void);

/**
 * Releases a string allocated by this library. Null is a no-op.
 *
 * # Safety
 * `s` must be null or a string returned by this library that has not been
 * freed yet.
 */
void htc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif // __cplusplus

#endif  /* HTC_FFI_H */
