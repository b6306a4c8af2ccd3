#include <cmath>

#include "collapse/core.hpp"
#include "doctest.h"

using namespace collapse;

namespace {

SimConfig small_config() {
  SimConfig c;
  c.grid = make_grid(0.1, 2.0);
  c.dt = 1e-4;
  c.t_end = 1.0;
  c.profile.f0 = 1.0;
  return c;
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

}  // namespace

TEST_CASE("grid node count and radii") {
  const RadialGrid g = make_grid(0.1, 100.0);
  CHECK(g.node_count == 1001);
  CHECK(g.last() == 1000);
  CHECK(g.radius(0) == 0.0);
  CHECK(g.r_max == doctest::Approx(100.0).epsilon(1e-15));
  // q*dr, no accumulated drift
  for (std::size_t q = 0; q + 1 < g.node_count; ++q) {
    CHECK(g.radius(q) == static_cast<double>(q) * 0.1);
    const double step = g.radius(q + 1) - g.radius(q);
    CHECK(std::abs(step - 0.1) <= 4.0 * std::numeric_limits<double>::epsilon() * g.radius(q + 1));
  }
}

TEST_CASE("grid rejects bad input") {
  CHECK(code_of([] { make_grid(0.0, 1.0); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { make_grid(-0.1, 1.0); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { make_grid(0.1, NAN); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { make_grid(0.1, 0.2); }) == ErrorCode::invalid_argument);
  CHECK(make_grid(0.1, 0.3).node_count == 4);
}

TEST_CASE("model names round trip") {
  for (ModelKind m : {ModelKind::YM41, ModelKind::CP1Q1, ModelKind::CP1Q2}) CHECK(parse_model(model_name(m)) == m);
  CHECK(code_of([] { parse_model("ym41"); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { parse_model(""); }) == ErrorCode::invalid_argument);
}

TEST_CASE("validate") {
  SimConfig c = small_config();
  CHECK(validate(c).empty());

  SUBCASE("dt warning") {
    c.dt = 0.01;
    const auto w = validate(c);
    REQUIRE(w.size() == 1);
    CHECK(w[0].find("dr^1.5/150") != std::string::npos);
  }
  SUBCASE("errors") {
    auto expect_bad = [](SimConfig cfg) { CHECK(code_of([&] { validate(cfg); }) == ErrorCode::invalid_argument); };
    SimConfig x = c;
    x.dt = 0.0;
    expect_bad(x);
    x = c;
    x.dt = -1e-4;
    expect_bad(x);
    x = c;
    x.profile.f0 = 0.0;
    expect_bad(x);
    x = c;
    x.t_end = -1.0;
    expect_bad(x);
    x = c;
    x.corrector_iterations = 0;
    expect_bad(x);
    x = c;
    x.stop_fraction = 1.0;
    expect_bad(x);
    x = c;
    x.stop_fraction = 0.0;
    expect_bad(x);
    x = c;
    x.snapshot_times = {1.0, -0.5};
    expect_bad(x);
    x = c;
    x.v0 = INFINITY;
    expect_bad(x);
  }
}

TEST_CASE("init_state fills the profile and ignores dt and v0") {
  SimConfig c = small_config();
  c.profile.kind = InitialProfile::Kind::Parabolic;
  c.profile.p = -0.25;
  const FieldState a = init_state(c);
  REQUIRE(a.f_curr.size() == c.grid.node_count);
  for (std::size_t q = 0; q < a.f_curr.size(); ++q) {
    const double r = c.grid.radius(q);
    CHECK(a.f_curr[q] == -0.25 * r * r + 1.0);
  }
  CHECK(a.f_prev == a.f_curr);
  CHECK(a.t == 0.0);
  CHECK(a.step == 0);

  c.dt = 3e-5;
  c.v0 = -0.7;
  const FieldState b = init_state(c);
  CHECK(b.f_curr == a.f_curr);
  CHECK(b.f_prev == a.f_prev);
}

TEST_CASE("nearest_step") {
  CHECK(nearest_step(0.0, 0.1) == 0);
  CHECK(nearest_step(1.0, 0.25) == 4);
  CHECK(nearest_step(0.26, 0.1) == 3);
  CHECK(nearest_step(0.24, 0.1) == 2);
  // exact halves go to the earlier step
  CHECK(nearest_step(0.5, 1.0) == 0);
  CHECK(nearest_step(2.5, 1.0) == 2);
  CHECK(nearest_step(110.0, 0.005) == 22000);
}
