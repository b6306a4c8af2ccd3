#include <cmath>
#include <vector>

#include "collapse/predictions.hpp"
#include "doctest.h"

using namespace collapse;

namespace {

// (rhs - fddot) for f = p r^2 + a (t-T)^2 with exact derivatives, in long double.
long double ym41_defect(long double p, long double a, long double T, long double r, long double t) {
  const long double f = p * r * r + a * (t - T) * (t - T), fr = 2 * p * r, frr = 2 * p, fd = 2 * a * (t - T);
  const long double rhs = frr + 5 * fr / r + (2 * (fd * fd - fr * fr) - 8 * r * fr) / (f + r * r);
  return (rhs - 2 * a) * (f + r * r);
}

long double cp1q2_defect(long double p, long double a, long double T, long double r, long double t) {
  const long double f = p * r * r + a * (t - T) * (t - T), fr = 2 * p * r, frr = 2 * p, fd = 2 * a * (t - T);
  const long double r4 = r * r * r * r;
  const long double rhs = frr + 5 * fr / r + (2 * f * (fd * fd - fr * fr) - 8 * r * r * r * fr) / (f * f + r4);
  return (2 * a - rhs) * (f * f + r4);
}

}  // namespace

TEST_CASE("parabolic prediction") {
  const PredictedParabola p = predict_parabola(ModelKind::YM41, 1.0, -0.01);
  CHECK(p.a == doctest::Approx(2.5e-5).epsilon(1e-15));
  CHECK(p.T == doctest::Approx(200.0).epsilon(1e-15));
  CHECK(p(0.0) == doctest::Approx(1.0).epsilon(1e-14));
  for (double f0 : {0.5, 1.0, 2.0, 7.3})
    for (double v0 : {-0.01, -0.02, 0.05, -0.0037}) {
      const PredictedParabola q = predict_parabola(ModelKind::CP1Q2, f0, v0);
      CHECK(q.a * q.T * q.T == doctest::Approx(f0).epsilon(1e-14));
      CHECK(q.T > 0.0);
    }
  CHECK_THROWS_AS(predict_parabola(ModelKind::CP1Q1, 1.0, -0.01), Error);
  CHECK_THROWS_AS(predict_parabola(ModelKind::YM41, 1.0, 0.0), Error);
  CHECK_THROWS_AS(predict_parabola(ModelKind::YM41, -1.0, -0.01), Error);
}

TEST_CASE("profile parabola signs") {
  const ProfileParabola neg = profile_parabola(1.0, -0.01);
  CHECK(neg.p == doctest::Approx(-1.25e-5));
  CHECK(neg.a == doctest::Approx(2.5e-5));
  CHECK(neg.T == doctest::Approx(200.0));
  CHECK(neg(0.0, 0.0) == doctest::Approx(1.0));
  CHECK(profile_parabola(1.0, -0.01, CurvatureSign::Positive).p == doctest::Approx(1.25e-5));
}

TEST_CASE("profile residuals match direct substitution") {
  CHECK(profile_residual(ModelKind::YM41, 1.0, -0.01, 0.0, 50.0) == 0.0);
  CHECK(profile_residual(ModelKind::CP1Q2, 1.0, -0.01, 0.0, 50.0) == 0.0);
  CHECK(profile_residual(ModelKind::YM41, 1.0, -0.01, 1.0, 0.0) == doctest::Approx(1.25e-9).epsilon(1e-12));
  CHECK(profile_residual(ModelKind::CP1Q2, 1.0, -0.01, 1.0, 200.0) == doctest::Approx(1.5625e-14).epsilon(1e-12));
  for (double f0 : {1.0, 2.0})
    for (double v0 : {-0.01, -0.03})
      for (double r : {0.5, 1.0, 3.0})
        for (double t : {0.0, 40.0, 150.0}) {
          const ProfileParabola pp = profile_parabola(f0, v0);
          CAPTURE(f0);
          CAPTURE(v0);
          CAPTURE(r);
          CAPTURE(t);
          const double y = profile_residual(ModelKind::YM41, f0, v0, r, t);
          CHECK(y == doctest::Approx((double)ym41_defect(pp.p, pp.a, pp.T, r, t)).epsilon(1e-9));
          const double c = profile_residual(ModelKind::CP1Q2, f0, v0, r, t);
          CHECK(c == doctest::Approx((double)cp1q2_defect(pp.p, pp.a, pp.T, r, t)).epsilon(1e-6).scale(1e-20));
        }
  CHECK_THROWS_AS(profile_residual(ModelKind::CP1Q1, 1.0, -0.01, 1.0, 0.0), Error);
}

TEST_CASE("kinetic norm") {
  CHECK(kinetic_norm_q1(2.0, 2.0) == doctest::Approx(std::log(2.0) - 0.5).epsilon(1e-14));
  CHECK(kinetic_norm_q1(0.01, 62.1) == doctest::Approx(16.468).epsilon(1e-4));
  const double big = kinetic_norm_q1(1e6 * 3.0, 3.0);
  CHECK(big >= 0.0);
  CHECK(big <= 1e-12);
  // series branch and closed form agree where they meet
  const double R = 1.0, f_edge = 1.0 / std::sqrt(1e-3);
  const double lo = kinetic_norm_q1(f_edge * (1 - 1e-9), R), hi = kinetic_norm_q1(f_edge * (1 + 1e-9), R);
  CHECK(lo == doctest::Approx(hi).epsilon(1e-6));
  // x^2/2 leading term
  CHECK(kinetic_norm_q1(1e4, 1.0) == doctest::Approx(0.5e-16).epsilon(1e-7));
  double prev = INFINITY;
  for (double f = 1e-6; f < 1e6; f *= 1.01) {
    const double k = kinetic_norm_q1(f, 62.1);
    REQUIRE(k < prev);
    prev = k;
  }
  CHECK_THROWS_AS(kinetic_norm_q1(0.0, 1.0), Error);
  CHECK_THROWS_AS(kinetic_norm_q1(1.0, -1.0), Error);
}

TEST_CASE("collapse integral") {
  const CollapseIntegral I(1.0, 62.1);
  // about c T for the reported c and collapse time
  CHECK(I.total() == doctest::Approx(0.0267 * 113.0).epsilon(0.03));
  CHECK(I.G(1.0) == 0.0);
  for (double f : {0.9, 0.5, 0.1, 1e-3, 1e-8, 1e-14}) {
    const double s = I.G(f);
    CHECK(std::abs(I.invert(s) - f) <= 1e-8 * f + 1e-10);
  }
  // G against a plain composite midpoint rule on [0.5, 1]
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = 0.5 + (i + 0.5) * 0.5 / n;
    sum += std::sqrt(kinetic_norm_q1(x, 62.1));
  }
  CHECK(I.G(0.5) == doctest::Approx(sum * 0.5 / n).epsilon(1e-9));
  CHECK_THROWS_AS(I.G(1.5), Error);
  CHECK_THROWS_AS(I.invert(I.total()), Error);
}

TEST_CASE("trajectory") {
  std::vector<double> times;
  for (int i = 0; i <= 130; ++i) times.push_back(i);
  const LagrangianTrajectory a = trajectory_q1(1.0, 0.0267, 62.1, times);
  const LagrangianTrajectory b = trajectory_q1(1.0, 0.0267, 62.1, times, 800);
  CHECK(a.points.front().f == 1.0);
  CHECK(a.collapse_time == doctest::Approx(113.0).epsilon(0.03));
  double prev = INFINITY;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    const TrajectoryPoint& p = a.points[i];
    CHECK(p.collapsed == (p.t >= a.collapse_time));
    if (p.collapsed) {
      CHECK(p.f == 0.0);
      continue;
    }
    CHECK(p.f < prev);
    prev = p.f;
    CHECK(std::abs(p.f - b.points[i].f) < 1e-8);
  }
  const std::vector<double> bad{0.0, 2.0, 1.0};
  CHECK_THROWS_AS(trajectory_q1(1.0, 0.0267, 62.1, bad), Error);
  CHECK_THROWS_AS(trajectory_q1(1.0, 0.0, 62.1, times), Error);
}

TEST_CASE("c and R from a regression line") {
  const CRExtraction e = c_R_from_line({-2.0, 1.0, 0.0});
  CHECK(e.c == doctest::Approx(1.0));
  CHECK(e.R_eff == doctest::Approx(std::exp(1.0)));
  const CRExtraction p = c_R_from_line({-2810.0, 10200.0, 0.0});
  CHECK(p.c == doctest::Approx(0.0267).epsilon(1e-3));
  CHECK(p.R_eff == doctest::Approx(62.1).epsilon(2e-3));
  CHECK_THROWS_AS(c_R_from_line({0.5, 1.0, 0.0}), Error);
}

TEST_CASE("c and R survive a round trip") {
  for (const auto& [c, R] : std::vector<std::pair<double, double>>{{0.0267, 62.1}, {0.05, 20.0}, {0.01, 150.0}}) {
    const double T = CollapseIntegral(1.0, R).total() / c;
    std::vector<double> times;
    const double dt = T / 4000.0;
    for (int i = 0; i < 4000; ++i) times.push_back(i * dt);
    const LagrangianTrajectory tr = trajectory_q1(1.0, c, R, times);
    std::vector<TracePoint> trace;
    for (const TrajectoryPoint& p : tr.points) trace.push_back({p.t, p.f});
    const CRExtraction e = extract_c_R(trace);
    CAPTURE(c);
    CAPTURE(R);
    CHECK(e.c == doctest::Approx(c).epsilon(0.01));
    CHECK(e.R_eff == doctest::Approx(R).epsilon(0.01));
    CHECK(e.points > 3000);
  }
  const std::vector<TracePoint> shortt{{0, 1}, {1, 0.9}};
  CHECK_THROWS_AS(extract_c_R(shortt), Error);
}

TEST_CASE("empirical line law") {
  const EmpiricalLineLaw a = empirical_line_law_q1(1.0, -0.01);
  CHECK(a.T == doctest::Approx(120.0));
  CHECK(a.m == doctest::Approx(-0.0075));
  CHECK(empirical_line_law_q1(1.0, -0.04).T == doctest::Approx(30.0));
  CHECK(empirical_line_law_q1(2.0, -0.01).T == doctest::Approx(240.0));
  CHECK(empirical_line_law_q1(2.0, 0.01).m < 0.0);
}
