/* Compiles the public header as C and runs a short simulation. */
#include <stdio.h>

#include "collapse/collapse.h"

int main(void) {
  clp_config* cfg = NULL;
  clp_result* res = NULL;
  double t[4], f[4];
  if (clp_config_create(&cfg) != CLP_OK) return 1;
  clp_config_set_model(cfg, CLP_CP1Q1);
  clp_config_set_grid(cfg, 0.1, 5.0);
  clp_config_set_time(cfg, 0.001, 0.003);
  clp_config_set_initial(cfg, CLP_PROFILE_FLAT, 1.0, 0.0, -0.01);
  if (clp_simulate(cfg, &res) != CLP_OK) {
    fprintf(stderr, "simulate: %s\n", clp_last_error());
    return 1;
  }
  if (clp_result_trace_length(res) != 4 || clp_result_trace(res, t, f, 4) != CLP_OK) return 1;
  if (!(f[3] < f[0])) return 1;
  printf("f(0, %g) = %.12g\n", t[3], f[3]);
  clp_result_destroy(res);
  clp_config_destroy(cfg);
  return 0;
}
