#include <cmath>
#include <vector>

#include "collapse/convergence.hpp"
#include "collapse/integrator.hpp"
#include "doctest.h"

using namespace collapse;

namespace {

SimConfig base(ModelKind m, double dr, double dt) {
  SimConfig c;
  c.model = m;
  c.grid = make_grid(dr, 12.0);
  c.dt = dt;
  c.v0 = -0.01;
  c.profile.f0 = 1.0;
  c.t_end = 10.0;
  return c;
}

const std::vector<Probe> kProbes{{0.0, "E0", 0}, {10.0, "E10", -1}};

}  // namespace

TEST_CASE("log quotient") {
  CHECK(*log_quotient(4.0, 1.0, 2.0, 1.0) == doctest::Approx(2.0));
  CHECK(*log_quotient(1e-4, 5e-5, 0.04, 0.02) == doctest::Approx(1.0));
  CHECK_FALSE(log_quotient(0.0, 1.0, 2.0, 1.0));
  CHECK_FALSE(log_quotient(1.0, 1.0, 1.0, 1.0));
  CHECK_FALSE(log_quotient(1.0, -1.0, 2.0, 1.0));
}

TEST_CASE("probe nodes") {
  const RadialGrid g = make_grid(0.1, 100.0);
  CHECK(probe_node({0.0, "", 0}, g) == 0);
  CHECK(probe_node({10.0, "", 0}, g) == 100);
  CHECK(probe_node({10.0, "", -1}, g) == 99);
  CHECK(probe_node({10.0, "", 0}, make_grid(0.0025, 100.0)) == 4000);
  CHECK_THROWS_AS(probe_node({0.05, "", 0}, g), Error);
  CHECK_THROWS_AS(probe_node({0.0, "", -1}, g), Error);
  CHECK_THROWS_AS(probe_node({200.0, "", 0}, g), Error);
}

TEST_CASE("reference rows have zero error") {
  const SimConfig c = base(ModelKind::YM41, 0.1, 0.01);
  const std::vector<double> dts{0.01, 0.02, 0.01};
  const ConvergenceTable t = refine_time(c, dts, 0.01, kProbes, 10.0);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.reference_step == 0.01);
  for (std::size_t p = 0; p < 2; ++p) {
    CHECK(t.rows[0].errors[p] == 0.0);
    CHECK(t.rows[2].errors[p] == 0.0);
    CHECK(t.rows[0].values[p] == t.reference_values[p]);
    CHECK(t.rows[1].errors[p] > 0.0);
    CHECK_FALSE(t.rows[0].quotients[p].has_value());
  }
  CHECK(t.rows[0].h == 0.0);
  CHECK(t.rows[1].h == doctest::Approx(0.01));

  // the reference value is the plain simulation read at t_probe
  SimConfig direct = c;
  direct.snapshot_times = {10.0};
  const SimulationResult r = run(direct);
  CHECK(t.reference_values[0] == r.snapshots[0].f[0]);
  CHECK(t.reference_values[1] == r.snapshots[0].f[99]);
}

TEST_CASE("thread count does not change the table") {
  const SimConfig c = base(ModelKind::CP1Q1, 0.1, 0.005);
  const std::vector<double> dts{0.01, 0.02, 0.04};
  const ConvergenceTable a = refine_time(c, dts, 0.005, kProbes, 8.0);
  RefineOptions opt;
  opt.threads = 3;
  const ConvergenceTable b = refine_time(c, dts, 0.005, kProbes, 8.0, opt);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].values == b.rows[i].values);
    CHECK(a.rows[i].errors == b.rows[i].errors);
  }
}

TEST_CASE("step shift reads earlier steps") {
  const SimConfig c = base(ModelKind::CP1Q1, 0.1, 0.01);
  const std::vector<double> dts{0.02};
  RefineOptions opt;
  opt.step_shift = -5;
  const ConvergenceTable t = refine_time(c, dts, 0.01, kProbes, 5.0, opt);
  SimConfig direct = c;
  direct.snapshot_times = {4.95};
  CHECK(t.reference_values[0] == run(direct).snapshots[0].f[0]);
}

TEST_CASE("space refinement reads the same radius") {
  const SimConfig c = base(ModelKind::YM41, 0.1, 0.001);
  const std::vector<double> drs{0.2, 0.1};
  const ConvergenceTable t = refine_space(c, drs, 0.05, kProbes, 2.0);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].ok);
  CHECK(t.rows[1].errors[0] < t.rows[0].errors[0]);
  CHECK(t.rows[1].quotients[0].has_value());
  const std::vector<double> odd{0.3};
  CHECK_THROWS_AS(refine_space(c, odd, 0.05, std::vector<Probe>{{10.0, "", 0}}, 2.0), Error);
}

TEST_CASE("time quotients approach one") {
  SimConfig c = base(ModelKind::YM41, 0.1, 0.00125);
  c.grid = make_grid(0.1, 100.0);
  const std::vector<double> dts{0.05, 0.04, 0.02, 0.01, 0.005};
  const ConvergenceTable t = refine_time(c, dts, 0.00125, kProbes, 100.0);
  for (std::size_t p = 0; p < 2; ++p) {
    double prev = 0.0;
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
      const double q = t.rows[i].quotients[p].value();
      CHECK(q >= 0.99);
      CHECK(q <= 1.01);
      CHECK(std::abs(q - 1.0) <= std::abs(prev - 1.0));
      prev = q;
    }
  }
  // first row of the table
  CHECK(t.rows[0].errors[0] == doctest::Approx(0.000060920672).epsilon(1e-6));
}
