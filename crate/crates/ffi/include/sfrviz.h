/* SPDX-License-Identifier: Apache-2.0 */

#ifndef SFRVIZ_H
#define SFRVIZ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SfrvizStatus {
  SFRVIZ_STATUS_OK = 0,
  SFRVIZ_STATUS_NULL_POINTER = 1,
  SFRVIZ_STATUS_MALFORMED_GRAPH = 2,
  SFRVIZ_STATUS_INVALID_GROUP = 3,
  SFRVIZ_STATUS_NOT_FOUND = 4,
  SFRVIZ_STATUS_UNREACHABLE = 5,
  SFRVIZ_STATUS_INTERNAL = 6,
} SfrvizStatus;

typedef enum SfrvizTraversal {
  SFRVIZ_TRAVERSAL_SFR = 0,
  SFRVIZ_TRAVERSAL_DFS = 1,
} SfrvizTraversal;

/**
 * A loaded control-flow graph.
 */
typedef struct SfrvizGraph SfrvizGraph;

/**
 * A node numbering of a graph.
 */
typedef struct SfrvizNumbering SfrvizNumbering;

/**
 * A rendered view of a graph.
 */
typedef struct SfrvizView SfrvizView;

/**
 * Placement and scoring of one visible node.
 */
typedef struct SfrvizCell {
  uint32_t sfr;
  uint32_t lane;
  uint32_t depth;
  uint32_t width;
  uint32_t score;
  double x;
  double y;
} SfrvizCell;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread. The pointer stays valid
 * until the next failing call on the same thread.
 */
const char *sfrviz_last_error(void);

/**
 * Static description of a status code.
 */
const char *sfrviz_status_message(enum SfrvizStatus status);

/**
 * Parses a JSON graph document of `len` bytes.
 *
 * # Safety
 * `data` must point to `len` readable bytes and `out` must be writable.
 */
enum SfrvizStatus sfrviz_graph_load(const uint8_t *data, size_t len, struct SfrvizGraph **out);

/**
 * # Safety
 * `graph` must be null or a handle from `sfrviz_graph_load` not yet freed.
 */
void sfrviz_graph_free(struct SfrvizGraph *graph);

/**
 * # Safety
 * `graph` must be a live handle and `out` writable.
 */
enum SfrvizStatus sfrviz_graph_node_count(const struct SfrvizGraph *graph, size_t *out);

/**
 * Number of warnings (duplicate edges, unreachable nodes) found on load.
 *
 * # Safety
 * `graph` must be a live handle and `out` writable.
 */
enum SfrvizStatus sfrviz_graph_warning_count(const struct SfrvizGraph *graph, size_t *out);

/**
 * Numbers the graph with the given traversal.
 *
 * # Safety
 * `graph` must be a live handle and `out` writable.
 */
enum SfrvizStatus sfrviz_number(const struct SfrvizGraph *graph,
                                enum SfrvizTraversal traversal,
                                struct SfrvizNumbering **out);

/**
 * The number of `node`, starting at 1 for the root.
 *
 * # Safety
 * `numbering` must be a live handle and `out` writable.
 */
enum SfrvizStatus sfrviz_numbering_get(const struct SfrvizNumbering *numbering,
                                       uint64_t node,
                                       uint32_t *out);

/**
 * # Safety
 * `numbering` must be null or a live handle.
 */
void sfrviz_numbering_free(struct SfrvizNumbering *numbering);

/**
 * Lays out the graph. With `grouped` the default grouping is applied,
 * otherwise every node is drawn.
 *
 * # Safety
 * `graph` must be a live handle and `out` writable.
 */
enum SfrvizStatus sfrviz_view_render(const struct SfrvizGraph *graph,
                                     bool grouped,
                                     struct SfrvizView **out);

/**
 * # Safety
 * `view` must be null or a live handle.
 */
void sfrviz_view_free(struct SfrvizView *view);

/**
 * Number of drawn (reachable, visible) nodes.
 *
 * # Safety
 * `view` must be a live handle and `out` writable.
 */
enum SfrvizStatus sfrviz_view_node_count(const struct SfrvizView *view, size_t *out);

/**
 * Cell of a visible node. Collapsed groups are addressed by their
 * super-node id.
 *
 * # Safety
 * `view` must be a live handle and `out` writable.
 */
enum SfrvizStatus sfrviz_view_cell(const struct SfrvizView *view,
                                   uint64_t node,
                                   struct SfrvizCell *out);

/**
 * # Safety
 * `view` must be a live handle and `out` writable.
 */
enum SfrvizStatus sfrviz_view_is_reducible(const struct SfrvizView *view, bool *out);

/**
 * Deepest loop nesting in the view.
 *
 * # Safety
 * `view` must be a live handle and `out` writable.
 */
enum SfrvizStatus sfrviz_view_max_loop_depth(const struct SfrvizView *view, uint32_t *out);

/**
 * Canonical layout export JSON. Free with `sfrviz_string_free`.
 *
 * # Safety
 * `view` must be a live handle and `out` writable.
 */
enum SfrvizStatus sfrviz_view_layout_json(const struct SfrvizView *view, char **out);

/**
 * SVG drawing of the view. Free with `sfrviz_string_free`.
 *
 * # Safety
 * `view` must be a live handle and `out` writable.
 */
enum SfrvizStatus sfrviz_view_svg(const struct SfrvizView *view, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void sfrviz_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SFRVIZ_H */
