#include <cmath>
#include <cstring>
#include <string>
#include <thread>
#include <vector>

#include "collapse/collapse.h"
#include "doctest.h"

namespace {

clp_config* small_config() {
  clp_config* c = nullptr;
  REQUIRE(clp_config_create(&c) == CLP_OK);
  REQUIRE(clp_config_set_model(c, CLP_YM41) == CLP_OK);
  REQUIRE(clp_config_set_grid(c, 0.1, 10.0) == CLP_OK);
  REQUIRE(clp_config_set_time(c, 0.01, 2.0) == CLP_OK);
  REQUIRE(clp_config_set_initial(c, CLP_PROFILE_FLAT, 1.0, 0.0, -0.01) == CLP_OK);
  return c;
}

}  // namespace

TEST_CASE("names and version") {
  CHECK(std::string(clp_version()) == "0.1.0");
  CHECK(std::string(clp_model_name(CLP_CP1Q2)) == "CP1Q2");
  clp_model m;
  CHECK(clp_parse_model("CP1Q1", &m) == CLP_OK);
  CHECK(m == CLP_CP1Q1);
  CHECK(std::string(clp_last_error()).empty());
  CHECK(clp_parse_model("nope", &m) == CLP_E_INVALID_ARGUMENT);
  CHECK(std::string(clp_last_error()).find("nope") != std::string::npos);
  CHECK(clp_parse_model(nullptr, &m) == CLP_E_INVALID_ARGUMENT);
}

TEST_CASE("last error is per thread") {
  clp_model m;
  CHECK(clp_parse_model("bad", &m) != CLP_OK);
  std::string other = "unset";
  std::thread([&] { other = clp_last_error(); }).join();
  CHECK(other.empty());
  CHECK_FALSE(std::string(clp_last_error()).empty());
}

TEST_CASE("config validation and warnings") {
  clp_config* c = small_config();
  CHECK(clp_config_node_count(c) == 101);
  CHECK(clp_config_dr(c) == 0.1);
  size_t nw = 99;
  CHECK(clp_config_validate(c, &nw) == CLP_OK);
  CHECK(nw == 1);  // dt = 0.01 exceeds dr^1.5/150
  CHECK(std::string(clp_config_warning(c, 0)).find("dt=") == 0);
  CHECK(clp_config_warning(c, 1) == nullptr);

  clp_config* d = clp_config_clone(c);
  REQUIRE(d);
  CHECK(clp_config_set_time(d, -1.0, 2.0) == CLP_OK);
  CHECK(clp_config_validate(d, &nw) == CLP_E_INVALID_ARGUMENT);
  CHECK(clp_config_validate(c, &nw) == CLP_OK);
  CHECK(clp_config_set_grid(d, 0.1, 0.2) == CLP_E_INVALID_ARGUMENT);
  CHECK(clp_config_set_corrector_iterations(d, 0) == CLP_OK);
  CHECK(clp_simulate(d, nullptr) == CLP_E_INVALID_ARGUMENT);
  clp_config_destroy(d);
  clp_config_destroy(c);
  clp_config_destroy(nullptr);
  CHECK(clp_config_create(nullptr) == CLP_E_INVALID_ARGUMENT);
}

TEST_CASE("simulate through handles") {
  clp_config* c = small_config();
  const double snaps[] = {1.0, 2.0};
  REQUIRE(clp_config_set_snapshot_times(c, snaps, 2) == CLP_OK);
  clp_result* r = nullptr;
  REQUIRE(clp_simulate(c, &r) == CLP_OK);
  CHECK(clp_result_stop_reason(r) == CLP_STOP_T_END);
  CHECK(std::string(clp_result_stop_name(r)) == "ReachedTEnd");
  const size_t n = clp_result_trace_length(r);
  CHECK(n == 201);
  std::vector<double> t(n), f(n);
  CHECK(clp_result_trace(r, t.data(), f.data(), n) == CLP_OK);
  CHECK(t.back() == doctest::Approx(2.0));
  CHECK(f[0] == 1.0);
  CHECK(f.back() < 1.0);
  REQUIRE(clp_result_snapshot_count(r) == 2);
  double ts;
  const double* s;
  size_t ns;
  CHECK(clp_result_snapshot(r, 1, &ts, &s, &ns) == CLP_OK);
  CHECK(ts == doctest::Approx(2.0));
  CHECK(ns == 101);
  CHECK(s[0] == f.back());
  CHECK(clp_result_snapshot(r, 2, &ts, &s, &ns) == CLP_E_INVALID_ARGUMENT);
  clp_result_destroy(r);

  // a bad config fails at simulate with the validation message
  clp_config_set_stop_fraction(c, 2.0);
  clp_result* bad = nullptr;
  CHECK(clp_simulate(c, &bad) == CLP_E_INVALID_ARGUMENT);
  CHECK(std::string(clp_last_error()).find("stop_fraction") != std::string::npos);
  clp_config_destroy(c);
}

TEST_CASE("fitters") {
  const double x[] = {1, 2, 3, 4}, y[] = {3, 5, 7, 9};
  clp_line_fit l;
  REQUIRE(clp_fit_line(x, y, 4, &l) == CLP_OK);
  CHECK(l.m == doctest::Approx(2.0));
  CHECK(l.b == doctest::Approx(1.0));
  const double xs[] = {1, 1};
  CHECK(clp_fit_line(xs, y, 2, &l) == CLP_E_DEGENERATE_FIT);
  CHECK(clp_fit_line(nullptr, y, 2, &l) == CLP_E_INVALID_ARGUMENT);

  std::vector<double> px, py;
  for (int i = 0; i < 20; ++i) {
    px.push_back(i);
    py.push_back(0.5 * (i - 7.0) * (i - 7.0) + 2.0);
  }
  clp_parabola_fit p;
  REQUIRE(clp_fit_parabola_vertex(px.data(), py.data(), px.size(), &p) == CLP_OK);
  CHECK(p.a == doctest::Approx(0.5));
  CHECK(p.T == doctest::Approx(7.0));
  CHECK(p.offset == doctest::Approx(2.0));

  std::vector<double> ex, ey;
  for (int i = 0; i < 10; ++i) {
    const double th = 0.1 + 0.15 * i;
    ex.push_back(2.0 * std::cos(th));
    ey.push_back(1.0 + 3.0 * std::sin(th));
  }
  clp_conic_fit e;
  REQUIRE(clp_fit_ellipse(ex.data(), ey.data(), ex.size(), &e) == CLP_OK);
  CHECK(e.a == doctest::Approx(2.0));
  CHECK(e.b == doctest::Approx(3.0));
  CHECK(e.k == doctest::Approx(1.0));
  CHECK(clp_fit_hyperbola(ex.data(), ey.data(), ex.size(), &e) == CLP_E_DEGENERATE_FIT);

  const double wy[] = {1.0, 0.6, 0.4, 0.2};
  double ox[4], oy[4];
  size_t kept = 0;
  const clp_window w{CLP_WINDOW_AFTER_FRACTION, 0.5, 0.0};
  REQUIRE(clp_select_fit_window(x, wy, 4, &w, ox, oy, &kept) == CLP_OK);
  CHECK(kept == 2);
  CHECK(ox[0] == 3.0);
  const clp_window bad{static_cast<clp_window_kind>(7), 0, 0};
  CHECK(clp_select_fit_window(x, wy, 4, &bad, ox, oy, &kept) == CLP_E_INVALID_ARGUMENT);
}

TEST_CASE("predictions") {
  double a, T;
  REQUIRE(clp_predict_parabola(CLP_YM41, 1.0, -0.01, &a, &T) == CLP_OK);
  CHECK(a == doctest::Approx(2.5e-5));
  CHECK(T == doctest::Approx(200.0));
  CHECK(clp_predict_parabola(CLP_CP1Q1, 1.0, -0.01, &a, &T) == CLP_E_INVALID_ARGUMENT);
  double k;
  CHECK(clp_kinetic_norm_q1(1.0, 1.0, &k) == CLP_OK);
  CHECK(k == doctest::Approx(std::log(2.0) - 0.5));
  const double times[] = {0, 50, 200};
  double f[3];
  int collapsed[3];
  double tc;
  REQUIRE(clp_trajectory_q1(1.0, 0.0267, 62.1, times, 3, f, collapsed, &tc) == CLP_OK);
  CHECK(f[0] == 1.0);
  CHECK(collapsed[2] == 1);
  CHECK(f[2] == 0.0);
  CHECK(tc == doctest::Approx(113.0).epsilon(0.03));
  REQUIRE(clp_trajectory_q1(1.0, 0.0267, 62.1, times, 3, f, nullptr, nullptr) == CLP_OK);
  double m;
  REQUIRE(clp_empirical_line_law_q1(1.0, -0.01, &T, &m) == CLP_OK);
  CHECK(T == doctest::Approx(120.0));
}

TEST_CASE("stability") {
  const clp_stability_context ctx{CLP_CP1Q1, 5, 1.0, -0.01, 0.01};
  double diag[5], sub[4], sup[4], re[5], im[5];
  REQUIRE(clp_linearized_matrix(&ctx, diag, sub, sup) == CLP_OK);
  CHECK(diag[0] == doctest::Approx(-33333.3).epsilon(1e-5));
  REQUIRE(clp_eigenvalues(5, diag, sub, sup, re, im) == CLP_OK);
  CHECK(re[4] == doctest::Approx(-4052.7).epsilon(5e-4));
  double maxr;
  size_t viol = 1;
  REQUIRE(clp_negative_spectrum_check(&ctx, 1, &maxr, &viol) == CLP_OK);
  CHECK(viol == 0);
  CHECK(maxr == doctest::Approx(re[4]));
  double out[4];
  clp_lift_eigenvalue(-1.0, 0.0, 0.0, out);
  CHECK(out[1] == doctest::Approx(1.0));
  CHECK(out[3] == doctest::Approx(-1.0));
  const clp_vn_query q{CLP_YM41, 0.0, 1.0, 1.0, 0.01, 1e-4};
  clp_vn_result v;
  REQUIRE(clp_von_neumann(&q, &v) == CLP_OK);
  CHECK(v.growth_plus == 1.0);
  const clp_stability_context q2{CLP_CP1Q2, 5, 1.0, -0.01, 0.01};
  CHECK(clp_linearized_matrix(&q2, diag, sub, sup) == CLP_E_INVALID_ARGUMENT);
}

TEST_CASE("convergence table") {
  clp_config* c = small_config();
  const double dts[] = {0.01, 0.02};
  const clp_probe probes[] = {{0.0, 0}, {5.0, -1}};
  clp_table* t = nullptr;
  REQUIRE(clp_refine(c, CLP_REFINE_TIME, dts, 2, 0.005, probes, 2, 2.0, 0, 2, &t) == CLP_OK);
  CHECK(clp_table_row_count(t) == 2);
  CHECK(clp_table_probe_count(t) == 2);
  double step, h, value, err, quo;
  int ok, has;
  const char* note;
  REQUIRE(clp_table_row(t, 1, &step, &h, &ok, &note) == CLP_OK);
  CHECK(step == 0.02);
  CHECK(h == doctest::Approx(0.015));
  CHECK(ok == 1);
  REQUIRE(clp_table_cell(t, 1, 0, &value, &err, &quo, &has) == CLP_OK);
  CHECK(err == doctest::Approx(std::abs(value - clp_table_reference_value(t, 0))));
  CHECK(has == 1);
  CHECK(clp_table_cell(t, 0, 2, &value, &err, &quo, &has) == CLP_E_INVALID_ARGUMENT);
  clp_table_destroy(t);
  clp_config_destroy(c);
}
