#include "collapse/collapse.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "collapse/convergence.hpp"
#include "collapse/fitting.hpp"
#include "collapse/integrator.hpp"
#include "collapse/predictions.hpp"
#include "collapse/stability.hpp"

struct clp_config {
  collapse::SimConfig cfg;
  double r_max = 0.0;
  std::vector<std::string> warnings;
};

struct clp_result {
  collapse::SimulationResult res;
};

struct clp_slice_evolution {
  clp_conic_kind kind;
  std::vector<double> times;
  std::vector<clp_conic_fit> fits;
  clp_line_fit a_line{};
  double c = 0.0;
  clp_line_fit k_line{};
};

struct clp_table {
  collapse::ConvergenceTable table;
};

namespace {

thread_local std::string last_error;

clp_status to_status(collapse::ErrorCode c) {
  switch (c) {
    case collapse::ErrorCode::invalid_argument: return CLP_E_INVALID_ARGUMENT;
    case collapse::ErrorCode::degenerate_denominator: return CLP_E_DEGENERATE_DENOMINATOR;
    case collapse::ErrorCode::degenerate_fit: return CLP_E_DEGENERATE_FIT;
    case collapse::ErrorCode::non_finite: return CLP_E_NON_FINITE;
    case collapse::ErrorCode::no_convergence: return CLP_E_NO_CONVERGENCE;
  }
  return CLP_E_INTERNAL;
}

clp_status fail(clp_status s, std::string msg) {
  last_error = std::move(msg);
  return s;
}

// Runs f, mapping exceptions to status codes and recording the message.
template <class F>
clp_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return CLP_OK;
  } catch (const collapse::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CLP_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CLP_E_INTERNAL, e.what());
  } catch (...) {
    return fail(CLP_E_INTERNAL, "unknown error");
  }
}

#define CLP_REQUIRE(cond, msg) \
  if (!(cond)) return fail(CLP_E_INVALID_ARGUMENT, msg)

collapse::ModelKind to_model(clp_model m) {
  switch (m) {
    case CLP_YM41: return collapse::ModelKind::YM41;
    case CLP_CP1Q1: return collapse::ModelKind::CP1Q1;
    case CLP_CP1Q2: return collapse::ModelKind::CP1Q2;
  }
  collapse::raise(collapse::ErrorCode::invalid_argument, "unknown model");
}

std::vector<collapse::Point> points(const double* x, const double* y, std::size_t n) {
  std::vector<collapse::Point> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = {x[i], y[i]};
  return p;
}

clp_line_fit to_c(const collapse::LineFit& l) { return {l.m, l.b, l.rms}; }

collapse::StabilityContext to_cpp(const clp_stability_context& c) {
  return {to_model(c.model), c.n, c.f0, c.fdot0, c.dr};
}

}  // namespace

extern "C" {

const char* clp_last_error(void) { return last_error.c_str(); }

const char* clp_version(void) { return "0.1.0"; }

const char* clp_model_name(clp_model m) {
  switch (m) {
    case CLP_YM41: return "YM41";
    case CLP_CP1Q1: return "CP1Q1";
    case CLP_CP1Q2: return "CP1Q2";
  }
  return "unknown";
}

clp_status clp_parse_model(const char* name, clp_model* out) {
  CLP_REQUIRE(name && out, "null argument");
  return guarded([&] {
    switch (collapse::parse_model(name)) {
      case collapse::ModelKind::YM41: *out = CLP_YM41; break;
      case collapse::ModelKind::CP1Q1: *out = CLP_CP1Q1; break;
      case collapse::ModelKind::CP1Q2: *out = CLP_CP1Q2; break;
    }
  });
}

// ---- config ----

clp_status clp_config_create(clp_config** out) {
  CLP_REQUIRE(out, "null argument");
  return guarded([&] { *out = new clp_config(); });
}

clp_config* clp_config_clone(const clp_config* cfg) {
  if (!cfg) return nullptr;
  try {
    return new clp_config(*cfg);
  } catch (...) {
    return nullptr;
  }
}

void clp_config_destroy(clp_config* cfg) { delete cfg; }

clp_status clp_config_set_model(clp_config* cfg, clp_model model) {
  CLP_REQUIRE(cfg, "null config");
  return guarded([&] { cfg->cfg.model = to_model(model); });
}

clp_status clp_config_set_grid(clp_config* cfg, double dr, double r_max) {
  CLP_REQUIRE(cfg, "null config");
  return guarded([&] {
    cfg->cfg.grid = collapse::make_grid(dr, r_max);
    cfg->r_max = r_max;
  });
}

clp_status clp_config_set_time(clp_config* cfg, double dt, double t_end) {
  CLP_REQUIRE(cfg, "null config");
  cfg->cfg.dt = dt;
  cfg->cfg.t_end = t_end;
  last_error.clear();
  return CLP_OK;
}

clp_status clp_config_set_initial(clp_config* cfg, clp_profile_kind kind, double f0, double p, double v0) {
  CLP_REQUIRE(cfg, "null config");
  CLP_REQUIRE(kind == CLP_PROFILE_FLAT || kind == CLP_PROFILE_PARABOLIC, "unknown profile kind");
  cfg->cfg.profile.kind =
      kind == CLP_PROFILE_FLAT ? collapse::InitialProfile::Kind::Flat : collapse::InitialProfile::Kind::Parabolic;
  cfg->cfg.profile.f0 = f0;
  cfg->cfg.profile.p = kind == CLP_PROFILE_FLAT ? 0.0 : p;
  cfg->cfg.v0 = v0;
  last_error.clear();
  return CLP_OK;
}

clp_status clp_config_set_outer_bc(clp_config* cfg, clp_outer_bc bc) {
  CLP_REQUIRE(cfg, "null config");
  CLP_REQUIRE(bc == CLP_BC_FLAT || bc == CLP_BC_PARABOLIC_SLOPE, "unknown outer boundary condition");
  cfg->cfg.outer_bc = bc == CLP_BC_FLAT ? collapse::OuterBcKind::Flat : collapse::OuterBcKind::ParabolicSlope;
  last_error.clear();
  return CLP_OK;
}

clp_status clp_config_set_corrector_iterations(clp_config* cfg, int iterations) {
  CLP_REQUIRE(cfg, "null config");
  cfg->cfg.corrector_iterations = iterations;
  last_error.clear();
  return CLP_OK;
}

clp_status clp_config_set_stop_fraction(clp_config* cfg, double fraction) {
  CLP_REQUIRE(cfg, "null config");
  cfg->cfg.stop_fraction = fraction;
  last_error.clear();
  return CLP_OK;
}

clp_status clp_config_set_snapshot_times(clp_config* cfg, const double* times, size_t n) {
  CLP_REQUIRE(cfg, "null config");
  CLP_REQUIRE(times || n == 0, "null times");
  return guarded([&] { cfg->cfg.snapshot_times.assign(times, times + n); });
}

clp_status clp_config_validate(clp_config* cfg, size_t* warning_count) {
  CLP_REQUIRE(cfg, "null config");
  return guarded([&] {
    cfg->warnings = collapse::validate(cfg->cfg);
    if (warning_count) *warning_count = cfg->warnings.size();
  });
}

const char* clp_config_warning(const clp_config* cfg, size_t i) {
  if (!cfg || i >= cfg->warnings.size()) return nullptr;
  return cfg->warnings[i].c_str();
}

size_t clp_config_node_count(const clp_config* cfg) { return cfg ? cfg->cfg.grid.node_count : 0; }

double clp_config_dr(const clp_config* cfg) { return cfg ? cfg->cfg.grid.dr : 0.0; }

// ---- simulation ----

clp_status clp_simulate(const clp_config* cfg, clp_result** out) {
  CLP_REQUIRE(cfg && out, "null argument");
  return guarded([&] { *out = new clp_result{collapse::run(cfg->cfg)}; });
}

void clp_result_destroy(clp_result* res) { delete res; }

clp_stop_reason clp_result_stop_reason(const clp_result* res) {
  if (!res) return CLP_STOP_NON_FINITE;
  switch (res->res.stop_reason) {
    case collapse::StopReason::ReachedTEnd: return CLP_STOP_T_END;
    case collapse::StopReason::OriginBelowThreshold: return CLP_STOP_ORIGIN_THRESHOLD;
    case collapse::StopReason::NonFinite: return CLP_STOP_NON_FINITE;
  }
  return CLP_STOP_NON_FINITE;
}

const char* clp_result_stop_name(const clp_result* res) {
  return res ? collapse::stop_reason_name(res->res.stop_reason) : "";
}

const char* clp_result_detail(const clp_result* res) { return res ? res->res.detail.c_str() : ""; }

size_t clp_result_trace_length(const clp_result* res) { return res ? res->res.origin_trace.size() : 0; }

clp_status clp_result_trace(const clp_result* res, double* t, double* f, size_t capacity) {
  CLP_REQUIRE(res && t && f, "null argument");
  const auto& tr = res->res.origin_trace;
  const std::size_t n = std::min(capacity, tr.size());
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = tr[i].t;
    f[i] = tr[i].f;
  }
  last_error.clear();
  return CLP_OK;
}

size_t clp_result_snapshot_count(const clp_result* res) { return res ? res->res.snapshots.size() : 0; }

clp_status clp_result_snapshot(const clp_result* res, size_t i, double* t, const double** samples, size_t* n) {
  CLP_REQUIRE(res && t && samples && n, "null argument");
  CLP_REQUIRE(i < res->res.snapshots.size(), "snapshot index out of range");
  const collapse::Snapshot& s = res->res.snapshots[i];
  *t = s.t;
  *samples = s.f.data();
  *n = s.f.size();
  last_error.clear();
  return CLP_OK;
}

// ---- fitting ----

clp_status clp_fit_line(const double* x, const double* y, size_t n, clp_line_fit* out) {
  CLP_REQUIRE(x && y && out, "null argument");
  return guarded([&] { *out = to_c(collapse::fit_line(points(x, y, n))); });
}

clp_status clp_fit_parabola_vertex(const double* x, const double* y, size_t n, clp_parabola_fit* out) {
  CLP_REQUIRE(x && y && out, "null argument");
  return guarded([&] {
    const collapse::ParabolaFit p = collapse::fit_parabola_vertex(points(x, y, n));
    *out = {p.a, p.T, p.offset, p.rms};
  });
}

clp_status clp_fit_square_law(const double* x, const double* y, size_t n, double* c, double* rms) {
  CLP_REQUIRE(x && y && c, "null argument");
  return guarded([&] {
    const collapse::SquareLawFit s = collapse::fit_square_law(points(x, y, n));
    *c = s.c;
    if (rms) *rms = s.rms;
  });
}

clp_status clp_fit_ellipse(const double* x, const double* y, size_t n, clp_conic_fit* out) {
  CLP_REQUIRE(x && y && out, "null argument");
  return guarded([&] {
    const collapse::EllipseFit e = collapse::fit_ellipse(points(x, y, n));
    *out = {e.a, e.b, e.k, e.rms};
  });
}

clp_status clp_fit_hyperbola(const double* x, const double* y, size_t n, clp_conic_fit* out) {
  CLP_REQUIRE(x && y && out, "null argument");
  return guarded([&] {
    const collapse::HyperbolaFit h = collapse::fit_hyperbola(points(x, y, n));
    *out = {h.a, h.b, h.k, h.rms};
  });
}

clp_status clp_select_fit_window(const double* x, const double* y, size_t n, const clp_window* w, double* x_out,
                                 double* y_out, size_t* n_out) {
  CLP_REQUIRE(x && y && w && x_out && y_out && n_out, "null argument");
  return guarded([&] {
    collapse::WindowMode mode;
    switch (w->kind) {
      case CLP_WINDOW_AFTER_FRACTION: mode = collapse::window::AfterFraction{w->p1}; break;
      case CLP_WINDOW_TIME_RANGE: mode = collapse::window::TimeRange{w->p1, w->p2}; break;
      case CLP_WINDOW_BEFORE_BOUNDARY_HIT: mode = collapse::window::BeforeBoundaryHit{w->p1}; break;
      default: collapse::raise(collapse::ErrorCode::invalid_argument, "unknown window kind");
    }
    const auto kept = collapse::select_fit_window(points(x, y, n), mode);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      x_out[i] = kept[i].x;
      y_out[i] = kept[i].y;
    }
    *n_out = kept.size();
  });
}

void clp_slice_options_default(clp_slice_options* opt) {
  if (!opt) return;
  const collapse::SliceFitOptions d;
  *opt = {d.height_fraction, d.t_min, d.a_max, d.min_points};
}

clp_status clp_fit_slice_evolution(clp_conic_kind kind, const double* times, const double* const* samples,
                                   size_t n_slices, size_t node_count, double dr, const clp_slice_options* opt,
                                   clp_slice_evolution** out) {
  CLP_REQUIRE(times && samples && out, "null argument");
  CLP_REQUIRE(kind == CLP_CONIC_ELLIPSE || kind == CLP_CONIC_HYPERBOLA, "unknown conic kind");
  return guarded([&] {
    collapse::SliceFitOptions o;
    if (opt) o = {opt->height_fraction, opt->t_min, opt->a_max, opt->min_points};
    collapse::RadialGrid grid{dr, node_count, dr * static_cast<double>(node_count - 1)};
    if (!(dr > 0.0) || node_count < 4) collapse::raise(collapse::ErrorCode::invalid_argument, "bad slice grid");
    std::vector<collapse::Snapshot> snaps;
    for (std::size_t i = 0; i < n_slices; ++i) {
      if (!samples[i]) collapse::raise(collapse::ErrorCode::invalid_argument, "null slice");
      snaps.push_back({times[i], std::vector<double>(samples[i], samples[i] + node_count)});
    }
    auto ev = std::make_unique<clp_slice_evolution>();
    ev->kind = kind;
    if (kind == CLP_CONIC_ELLIPSE) {
      const auto e = collapse::fit_ellipse_evolution(snaps, grid, o);
      for (const auto& s : e.slices) {
        ev->times.push_back(s.t);
        ev->fits.push_back({s.fit.a, s.fit.b, s.fit.k, s.fit.rms});
      }
      ev->a_line = to_c(e.a_line);
      ev->c = e.b_law.c;
      ev->k_line = to_c(e.k_line);
    } else {
      const auto h = collapse::fit_hyperbola_evolution(snaps, grid, o);
      for (const auto& s : h.slices) {
        ev->times.push_back(s.t);
        ev->fits.push_back({s.fit.a, s.fit.b, s.fit.k, s.fit.rms});
      }
      ev->a_line = to_c(h.slope_line);
    }
    *out = ev.release();
  });
}

void clp_slice_evolution_destroy(clp_slice_evolution* ev) { delete ev; }

size_t clp_slice_evolution_count(const clp_slice_evolution* ev) { return ev ? ev->fits.size() : 0; }

clp_status clp_slice_evolution_slice(const clp_slice_evolution* ev, size_t i, double* t, clp_conic_fit* fit) {
  CLP_REQUIRE(ev && t && fit, "null argument");
  CLP_REQUIRE(i < ev->fits.size(), "slice index out of range");
  *t = ev->times[i];
  *fit = ev->fits[i];
  last_error.clear();
  return CLP_OK;
}

clp_status clp_slice_evolution_laws(const clp_slice_evolution* ev, clp_line_fit* a_line, double* c,
                                    clp_line_fit* k_line) {
  CLP_REQUIRE(ev, "null argument");
  if (a_line) *a_line = ev->a_line;
  if (c) *c = ev->c;
  if (k_line) *k_line = ev->k_line;
  last_error.clear();
  return CLP_OK;
}

// ---- predictions ----

clp_status clp_predict_parabola(clp_model model, double f0, double v0, double* a, double* T) {
  CLP_REQUIRE(a && T, "null argument");
  return guarded([&] {
    const auto p = collapse::predict_parabola(to_model(model), f0, v0);
    *a = p.a;
    *T = p.T;
  });
}

clp_status clp_profile_parabola(double f0, double v0, int positive_curvature, double* p, double* a, double* T) {
  CLP_REQUIRE(p && a && T, "null argument");
  return guarded([&] {
    const auto pp = collapse::profile_parabola(
        f0, v0, positive_curvature ? collapse::CurvatureSign::Positive : collapse::CurvatureSign::Negative);
    *p = pp.p;
    *a = pp.a;
    *T = pp.T;
  });
}

clp_status clp_profile_residual(clp_model model, double f0, double v0, double r, double t, double* out) {
  CLP_REQUIRE(out, "null argument");
  return guarded([&] { *out = collapse::profile_residual(to_model(model), f0, v0, r, t); });
}

clp_status clp_kinetic_norm_q1(double f, double R, double* out) {
  CLP_REQUIRE(out, "null argument");
  return guarded([&] { *out = collapse::kinetic_norm_q1(f, R); });
}

clp_status clp_trajectory_q1(double f0, double c, double R, const double* times, size_t n, double* f_out,
                             int* collapsed, double* collapse_time) {
  CLP_REQUIRE((times && f_out) || n == 0, "null argument");
  return guarded([&] {
    const auto tr = collapse::trajectory_q1(f0, c, R, std::span<const double>(times, n));
    for (std::size_t i = 0; i < n; ++i) {
      f_out[i] = tr.points[i].f;
      if (collapsed) collapsed[i] = tr.points[i].collapsed ? 1 : 0;
    }
    if (collapse_time) *collapse_time = tr.collapse_time;
  });
}

clp_status clp_extract_c_R(const double* t, const double* f, size_t n, double skip_start, double skip_end,
                           clp_cr_extraction* out) {
  CLP_REQUIRE(t && f && out, "null argument");
  return guarded([&] {
    std::vector<collapse::TracePoint> trace(n);
    for (std::size_t i = 0; i < n; ++i) trace[i] = {t[i], f[i]};
    const auto e = collapse::extract_c_R(trace, {skip_start, skip_end});
    *out = {e.c, e.R_eff, to_c(e.line), e.points};
  });
}

clp_status clp_empirical_line_law_q1(double f0, double v0, double* T, double* m) {
  CLP_REQUIRE(T && m, "null argument");
  return guarded([&] {
    const auto l = collapse::empirical_line_law_q1(f0, v0);
    *T = l.T;
    *m = l.m;
  });
}

// ---- stability ----

clp_status clp_linearized_matrix(const clp_stability_context* ctx, double* diag, double* sub, double* super) {
  CLP_REQUIRE(ctx && diag && sub && super, "null argument");
  return guarded([&] {
    const auto m = collapse::build_linearized_matrix(to_cpp(*ctx));
    std::copy(m.diag.begin(), m.diag.end(), diag);
    std::copy(m.sub.begin(), m.sub.end(), sub);
    std::copy(m.super.begin(), m.super.end(), super);
  });
}

clp_status clp_lift_constant(const clp_stability_context* ctx, double* c) {
  CLP_REQUIRE(ctx && c, "null argument");
  return guarded([&] { *c = to_cpp(*ctx).lift_constant(); });
}

clp_status clp_eigenvalues(size_t n, const double* diag, const double* sub, const double* super, double* re,
                           double* im) {
  CLP_REQUIRE(n >= 1 && diag && re && im, "null argument");
  CLP_REQUIRE(n == 1 || (sub && super), "null band");
  return guarded([&] {
    collapse::TridiagonalMatrix m{{diag, diag + n}, {sub, sub + (n - 1)}, {super, super + (n - 1)}};
    const auto s = collapse::eigenvalues(m);
    for (std::size_t i = 0; i < n; ++i) {
      re[i] = s.eigenvalues[i].real();
      im[i] = s.eigenvalues[i].imag();
    }
  });
}

void clp_lift_eigenvalue(double alpha_re, double alpha_im, double c, double out[4]) {
  if (!out) return;
  const auto [p, m] = collapse::lift_eigenvalue({alpha_re, alpha_im}, c);
  out[0] = p.real();
  out[1] = p.imag();
  out[2] = m.real();
  out[3] = m.imag();
}

clp_status clp_von_neumann(const clp_vn_query* q, clp_vn_result* out) {
  CLP_REQUIRE(q && out, "null argument");
  return guarded([&] {
    const auto r = collapse::von_neumann({to_model(q->model), q->kappa, q->r, q->f0, q->dr, q->dt});
    *out = {r.J.real(),           r.J.imag(),           r.omega_plus.real(), r.omega_plus.imag(),
            r.omega_minus.real(), r.omega_minus.imag(), r.growth_plus,       r.growth_minus};
  });
}

clp_status clp_negative_spectrum_check(const clp_stability_context* ctx, size_t n, double* max_real,
                                       size_t* violations) {
  CLP_REQUIRE(ctx && max_real && violations, "null argument");
  return guarded([&] {
    std::vector<collapse::StabilityContext> cs;
    for (std::size_t i = 0; i < n; ++i) cs.push_back(to_cpp(ctx[i]));
    const auto rep = collapse::negative_spectrum_check(cs);
    *max_real = rep.max_real;
    *violations = rep.violations.size();
  });
}

// ---- convergence ----

clp_status clp_refine(const clp_config* base, clp_refine_kind kind, const double* steps, size_t n_steps,
                      double reference, const clp_probe* probes, size_t n_probes, double t_probe, int step_shift,
                      unsigned threads, clp_table** out) {
  CLP_REQUIRE(base && steps && probes && out, "null argument");
  CLP_REQUIRE(kind == CLP_REFINE_TIME || kind == CLP_REFINE_SPACE, "unknown refinement kind");
  return guarded([&] {
    std::vector<collapse::Probe> ps;
    for (std::size_t i = 0; i < n_probes; ++i)
      ps.push_back({probes[i].r, "r=" + std::to_string(probes[i].r), probes[i].node_shift});
    const collapse::RefineOptions opt{step_shift, threads == 0 ? 1u : threads};
    const std::span<const double> st(steps, n_steps);
    auto t = std::make_unique<clp_table>();
    t->table = kind == CLP_REFINE_TIME ? collapse::refine_time(base->cfg, st, reference, ps, t_probe, opt)
                                       : collapse::refine_space(base->cfg, st, reference, ps, t_probe, opt);
    *out = t.release();
  });
}

void clp_table_destroy(clp_table* table) { delete table; }

size_t clp_table_row_count(const clp_table* table) { return table ? table->table.rows.size() : 0; }

size_t clp_table_probe_count(const clp_table* table) { return table ? table->table.probes.size() : 0; }

double clp_table_reference_value(const clp_table* table, size_t probe) {
  if (!table || probe >= table->table.reference_values.size()) return std::nan("");
  return table->table.reference_values[probe];
}

clp_status clp_table_row(const clp_table* table, size_t row, double* step, double* h, int* ok, const char** note) {
  CLP_REQUIRE(table, "null table");
  CLP_REQUIRE(row < table->table.rows.size(), "row index out of range");
  const auto& r = table->table.rows[row];
  if (step) *step = r.step;
  if (h) *h = r.h;
  if (ok) *ok = r.ok ? 1 : 0;
  if (note) *note = r.note.c_str();
  last_error.clear();
  return CLP_OK;
}

clp_status clp_table_cell(const clp_table* table, size_t row, size_t probe, double* value, double* error,
                          double* quotient, int* has_quotient) {
  CLP_REQUIRE(table, "null table");
  CLP_REQUIRE(row < table->table.rows.size(), "row index out of range");
  const auto& r = table->table.rows[row];
  CLP_REQUIRE(probe < table->table.probes.size(), "probe index out of range");
  const bool have = r.ok && probe < r.values.size();
  if (value) *value = have ? r.values[probe] : std::nan("");
  if (error) *error = have ? r.errors[probe] : std::nan("");
  const auto& q = r.quotients[probe];
  if (quotient) *quotient = q ? *q : std::nan("");
  if (has_quotient) *has_quotient = q ? 1 : 0;
  last_error.clear();
  return CLP_OK;
}

}  // extern "C"
