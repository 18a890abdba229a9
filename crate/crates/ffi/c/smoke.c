/* Build: cargo build -p descent-ffi
   cc -Icrates/ffi/include crates/ffi/c/smoke.c target/debug/libdescent_ffi.a -lpthread -ldl -lm -o smoke */
#include <stdio.h>
#include "descent.h"
int main(void) {
  DescentSystem *s; DescentGraph *g; size_t k; char *fp;
  if (descent_system_builtin(2, 1, &s) != DESCENT_STATUS_OK) return 1;
  if (descent_system_expand(s, 6, &g) != DESCENT_STATUS_OK) return 2;
  if (descent_compute_k(g, &k) != DESCENT_STATUS_OK) return 3;
  if (descent_fingerprint(g, &fp) != DESCENT_STATUS_OK) return 4;
  printf("k=%zu vertices=%zu\n%.12s\n", k, descent_graph_vertex_count(g), fp);
  descent_string_free(fp); descent_graph_free(g); descent_system_free(s);
  return 0;
}
