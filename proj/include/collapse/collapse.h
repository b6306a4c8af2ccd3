/* C interface to the collapse library. All functions returning clp_status
 * leave a message for clp_last_error() on failure. Handles are opaque and
 * owned by the caller once returned. */
#ifndef COLLAPSE_H
#define COLLAPSE_H

#include <stddef.h>

#if defined(_WIN32)
#if defined(COLLAPSE_BUILDING)
#define CLP_API __declspec(dllexport)
#else
#define CLP_API __declspec(dllimport)
#endif
#else
#define CLP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum clp_status {
  CLP_OK = 0,
  CLP_E_INVALID_ARGUMENT = 1,
  CLP_E_DEGENERATE_DENOMINATOR = 2,
  CLP_E_DEGENERATE_FIT = 3,
  CLP_E_NON_FINITE = 4,
  CLP_E_NO_CONVERGENCE = 5,
  CLP_E_INTERNAL = 6
} clp_status;

typedef enum clp_model { CLP_YM41 = 0, CLP_CP1Q1 = 1, CLP_CP1Q2 = 2 } clp_model;
typedef enum clp_profile_kind { CLP_PROFILE_FLAT = 0, CLP_PROFILE_PARABOLIC = 1 } clp_profile_kind;
typedef enum clp_outer_bc { CLP_BC_FLAT = 0, CLP_BC_PARABOLIC_SLOPE = 1 } clp_outer_bc;
typedef enum clp_stop_reason {
  CLP_STOP_T_END = 0,
  CLP_STOP_ORIGIN_THRESHOLD = 1,
  CLP_STOP_NON_FINITE = 2
} clp_stop_reason;

/* Message for the last failed call on this thread; empty after success. */
CLP_API const char* clp_last_error(void);
CLP_API const char* clp_version(void);
CLP_API const char* clp_model_name(clp_model m);
CLP_API clp_status clp_parse_model(const char* name, clp_model* out);

/* ---- simulation configuration ---- */

typedef struct clp_config clp_config;

CLP_API clp_status clp_config_create(clp_config** out);
CLP_API clp_config* clp_config_clone(const clp_config* cfg);
CLP_API void clp_config_destroy(clp_config* cfg);
CLP_API clp_status clp_config_set_model(clp_config* cfg, clp_model model);
CLP_API clp_status clp_config_set_grid(clp_config* cfg, double dr, double r_max);
CLP_API clp_status clp_config_set_time(clp_config* cfg, double dt, double t_end);
CLP_API clp_status clp_config_set_initial(clp_config* cfg, clp_profile_kind kind, double f0, double p, double v0);
CLP_API clp_status clp_config_set_outer_bc(clp_config* cfg, clp_outer_bc bc);
CLP_API clp_status clp_config_set_corrector_iterations(clp_config* cfg, int iterations);
CLP_API clp_status clp_config_set_stop_fraction(clp_config* cfg, double fraction);
CLP_API clp_status clp_config_set_snapshot_times(clp_config* cfg, const double* times, size_t n);
/* Validates and records non-fatal warnings, readable with clp_config_warning. */
CLP_API clp_status clp_config_validate(clp_config* cfg, size_t* warning_count);
CLP_API const char* clp_config_warning(const clp_config* cfg, size_t i);
CLP_API size_t clp_config_node_count(const clp_config* cfg);
CLP_API double clp_config_dr(const clp_config* cfg);

/* ---- simulation ---- */

typedef struct clp_result clp_result;

CLP_API clp_status clp_simulate(const clp_config* cfg, clp_result** out);
CLP_API void clp_result_destroy(clp_result* res);
CLP_API clp_stop_reason clp_result_stop_reason(const clp_result* res);
CLP_API const char* clp_result_stop_name(const clp_result* res);
CLP_API const char* clp_result_detail(const clp_result* res);
CLP_API size_t clp_result_trace_length(const clp_result* res);
/* Copies min(capacity, length) points. */
CLP_API clp_status clp_result_trace(const clp_result* res, double* t, double* f, size_t capacity);
CLP_API size_t clp_result_snapshot_count(const clp_result* res);
/* samples points into storage owned by res. */
CLP_API clp_status clp_result_snapshot(const clp_result* res, size_t i, double* t, const double** samples,
                                       size_t* n);

/* ---- fitting ---- */

typedef struct clp_line_fit {
  double m, b, rms;
} clp_line_fit;

typedef struct clp_parabola_fit {
  double a, T, offset, rms;
} clp_parabola_fit;

typedef struct clp_conic_fit {
  double a, b, k, rms;
} clp_conic_fit;

typedef enum clp_window_kind {
  CLP_WINDOW_AFTER_FRACTION = 0,   /* p1 = phi */
  CLP_WINDOW_TIME_RANGE = 1,       /* p1 = t1, p2 = t2 */
  CLP_WINDOW_BEFORE_BOUNDARY_HIT = 2 /* p1 = a_max */
} clp_window_kind;

typedef struct clp_window {
  clp_window_kind kind;
  double p1, p2;
} clp_window;

CLP_API clp_status clp_fit_line(const double* x, const double* y, size_t n, clp_line_fit* out);
CLP_API clp_status clp_fit_parabola_vertex(const double* x, const double* y, size_t n, clp_parabola_fit* out);
CLP_API clp_status clp_fit_square_law(const double* x, const double* y, size_t n, double* c, double* rms);
CLP_API clp_status clp_fit_ellipse(const double* x, const double* y, size_t n, clp_conic_fit* out);
CLP_API clp_status clp_fit_hyperbola(const double* x, const double* y, size_t n, clp_conic_fit* out);
/* x_out/y_out need room for n points; *n_out receives the kept count. */
CLP_API clp_status clp_select_fit_window(const double* x, const double* y, size_t n, const clp_window* w,
                                         double* x_out, double* y_out, size_t* n_out);

typedef struct clp_slice_options {
  double height_fraction;
  double t_min;
  double a_max; /* <= 0 disables the boundary window */
  size_t min_points;
} clp_slice_options;

CLP_API void clp_slice_options_default(clp_slice_options* opt);

typedef enum clp_conic_kind { CLP_CONIC_ELLIPSE = 0, CLP_CONIC_HYPERBOLA = 1 } clp_conic_kind;

typedef struct clp_slice_evolution clp_slice_evolution;

/* samples[i] holds node_count values of the slice at times[i]. */
CLP_API clp_status clp_fit_slice_evolution(clp_conic_kind kind, const double* times, const double* const* samples,
                                           size_t n_slices, size_t node_count, double dr,
                                           const clp_slice_options* opt, clp_slice_evolution** out);
CLP_API void clp_slice_evolution_destroy(clp_slice_evolution* ev);
CLP_API size_t clp_slice_evolution_count(const clp_slice_evolution* ev);
CLP_API clp_status clp_slice_evolution_slice(const clp_slice_evolution* ev, size_t i, double* t, clp_conic_fit* fit);
/* Ellipse: a_line, b(t) = c t^2, k_line. Hyperbola: only a_line is set, to
 * the line through -b/a against t; c and k_line are zero. */
CLP_API clp_status clp_slice_evolution_laws(const clp_slice_evolution* ev, clp_line_fit* a_line, double* c,
                                            clp_line_fit* k_line);

/* ---- predictions ---- */

CLP_API clp_status clp_predict_parabola(clp_model model, double f0, double v0, double* a, double* T);
CLP_API clp_status clp_profile_parabola(double f0, double v0, int positive_curvature, double* p, double* a,
                                        double* T);
CLP_API clp_status clp_profile_residual(clp_model model, double f0, double v0, double r, double t, double* out);
CLP_API clp_status clp_kinetic_norm_q1(double f, double R, double* out);
/* collapsed may be NULL. */
CLP_API clp_status clp_trajectory_q1(double f0, double c, double R, const double* times, size_t n, double* f_out,
                                     int* collapsed, double* collapse_time);

typedef struct clp_cr_extraction {
  double c, R_eff;
  clp_line_fit line;
  size_t points;
} clp_cr_extraction;

CLP_API clp_status clp_extract_c_R(const double* t, const double* f, size_t n, double skip_start, double skip_end,
                                   clp_cr_extraction* out);
CLP_API clp_status clp_empirical_line_law_q1(double f0, double v0, double* T, double* m);

/* ---- stability ---- */

typedef struct clp_stability_context {
  clp_model model;
  size_t n;
  double f0, fdot0, dr;
} clp_stability_context;

/* diag has n entries, sub and super n-1. */
CLP_API clp_status clp_linearized_matrix(const clp_stability_context* ctx, double* diag, double* sub,
                                         double* super);
CLP_API clp_status clp_lift_constant(const clp_stability_context* ctx, double* c);
/* Eigenvalues sorted by ascending real part. */
CLP_API clp_status clp_eigenvalues(size_t n, const double* diag, const double* sub, const double* super, double* re,
                                   double* im);
/* out = {re+, im+, re-, im-}. */
CLP_API void clp_lift_eigenvalue(double alpha_re, double alpha_im, double c, double out[4]);

typedef struct clp_vn_query {
  clp_model model;
  double kappa, r, f0, dr, dt;
} clp_vn_query;

typedef struct clp_vn_result {
  double J_re, J_im;
  double omega_plus_re, omega_plus_im, omega_minus_re, omega_minus_im;
  double growth_plus, growth_minus;
} clp_vn_result;

CLP_API clp_status clp_von_neumann(const clp_vn_query* q, clp_vn_result* out);
CLP_API clp_status clp_negative_spectrum_check(const clp_stability_context* ctx, size_t n, double* max_real,
                                               size_t* violations);

/* ---- convergence ---- */

typedef struct clp_probe {
  double r;
  int node_shift;
} clp_probe;

typedef enum clp_refine_kind { CLP_REFINE_TIME = 0, CLP_REFINE_SPACE = 1 } clp_refine_kind;

typedef struct clp_table clp_table;

CLP_API clp_status clp_refine(const clp_config* base, clp_refine_kind kind, const double* steps, size_t n_steps,
                              double reference, const clp_probe* probes, size_t n_probes, double t_probe,
                              int step_shift, unsigned threads, clp_table** out);
CLP_API void clp_table_destroy(clp_table* table);
CLP_API size_t clp_table_row_count(const clp_table* table);
CLP_API size_t clp_table_probe_count(const clp_table* table);
CLP_API double clp_table_reference_value(const clp_table* table, size_t probe);
/* ok is 0 when the row's run failed; note then explains why. */
CLP_API clp_status clp_table_row(const clp_table* table, size_t row, double* step, double* h, int* ok,
                                 const char** note);
CLP_API clp_status clp_table_cell(const clp_table* table, size_t row, size_t probe, double* value, double* error,
                                  double* quotient, int* has_quotient);

#ifdef __cplusplus
}
#endif

#endif /* COLLAPSE_H */
