#ifndef DESCENT_H
#define DESCENT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DescentIso {
  DESCENT_ISO_ISOMORPHIC = 0,
  DESCENT_ISO_NOT_ISOMORPHIC = 1,
  DESCENT_ISO_INSUFFICIENT_DEPTH = 2,
} DescentIso;

typedef enum DescentProperty {
  DESCENT_PROPERTY_G0 = 0,
  DESCENT_PROPERTY_G1 = 1,
  DESCENT_PROPERTY_G2 = 2,
  DESCENT_PROPERTY_P2 = 3,
  DESCENT_PROPERTY_P2_PRIME = 4,
  DESCENT_PROPERTY_P3 = 5,
} DescentProperty;

/**
 * Result code of every fallible call.
 */
typedef enum DescentStatus {
  DESCENT_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  DESCENT_STATUS_NULL_ARGUMENT = 1,
  /**
   * Input text was not UTF-8 or not a valid document.
   */
  DESCENT_STATUS_PARSE = 2,
  /**
   * An argument was outside the operation's domain.
   */
  DESCENT_STATUS_INVALID_ARGUMENT = 3,
  /**
   * The input does not satisfy the operation's precondition.
   */
  DESCENT_STATUS_PRECONDITION = 4,
  /**
   * The truncation is too shallow to decide.
   */
  DESCENT_STATUS_INSUFFICIENT_DEPTH = 5,
  /**
   * An internal consistency check failed.
   */
  DESCENT_STATUS_INVARIANT = 6,
  /**
   * Any other library error.
   */
  DESCENT_STATUS_OTHER = 7,
  /**
   * A panic was caught at the boundary.
   */
  DESCENT_STATUS_PANIC = 8,
} DescentStatus;

/**
 * Outcome of a property check.
 */
typedef enum DescentVerdict {
  DESCENT_VERDICT_PASS = 0,
  DESCENT_VERDICT_FAIL = 1,
  DESCENT_VERDICT_INCONCLUSIVE = 2,
} DescentVerdict;

/**
 * A finite layered digraph (a truncation).
 */
typedef struct DescentGraph DescentGraph;

/**
 * An expansion system.
 */
typedef struct DescentSystem DescentSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next call into the library on the same thread.
 */
const char *descent_last_error(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed. Null is ignored.
 */
void descent_string_free(char *s);

/**
 * Parses EXS text into a new system.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum DescentStatus descent_system_parse(const char *text, struct DescentSystem **out);

/**
 * The directed `m`-ary tree (`ladder == 0`) or the `m`-ladder (`ladder != 0`).
 *
 * # Safety
 * `out` must be writable.
 */
enum DescentStatus descent_system_builtin(size_t m, int32_t ladder, struct DescentSystem **out);

/**
 * # Safety
 * `sys` must come from this library and not have been freed. Null is ignored.
 */
void descent_system_free(struct DescentSystem *sys);

/**
 * Expands `sys` to `depth` levels.
 *
 * # Safety
 * `sys` must be a live handle; `out` must be writable.
 */
enum DescentStatus descent_system_expand(const struct DescentSystem *sys,
                                         size_t depth,
                                         struct DescentGraph **out);

/**
 * Parses LDG text into a new graph.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum DescentStatus descent_graph_parse(const char *text, struct DescentGraph **out);

/**
 * # Safety
 * `g` must come from this library and not have been freed. Null is ignored.
 */
void descent_graph_free(struct DescentGraph *g);

/**
 * Number of vertices; 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
size_t descent_graph_vertex_count(const struct DescentGraph *g);

/**
 * Depth (index of the last level); 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
size_t descent_graph_depth(const struct DescentGraph *g);

/**
 * Writes the graph as LDG text.
 *
 * # Safety
 * `g` must be a live handle; `out` must be writable.
 */
enum DescentStatus descent_graph_write(const struct DescentGraph *g, char **out);

/**
 * Checks one property on the truncation.
 *
 * # Safety
 * `g` must be a live handle; `out` must be writable.
 */
enum DescentStatus descent_check(const struct DescentGraph *g,
                                 enum DescentProperty property,
                                 enum DescentVerdict *out);

/**
 * The stabilisation constant k. Returns `DESCENT_STATUS_PRECONDITION` when
 * the truncation refutes stabilisation.
 *
 * # Safety
 * `g` must be a live handle; `k` must be writable.
 */
enum DescentStatus descent_compute_k(const struct DescentGraph *g, size_t *k);

/**
 * The fingerprint text: a `k=.. N=.. M=..` line followed by the canonical
 * LDG of the depth-M truncation.
 *
 * # Safety
 * `g` must be a live handle; `out` must be writable.
 */
enum DescentStatus descent_fingerprint(const struct DescentGraph *g, char **out);

/**
 * Decides whether two truncations come from isomorphic digraphs.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must be writable.
 */
enum DescentStatus descent_decide_iso(const struct DescentGraph *a,
                                      const struct DescentGraph *b,
                                      enum DescentIso *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DESCENT_H */
