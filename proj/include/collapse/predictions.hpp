#pragma once

#include <span>
#include <vector>

#include "collapse/core.hpp"
#include "collapse/fitting.hpp"

namespace collapse {

struct PredictedParabola {
  double a;
  double T;

  double operator()(double t) const { return a * (t - T) * (t - T); }
};

PredictedParabola predict_parabola(ModelKind model, double f0, double v0);

enum class CurvatureSign { Negative, Positive };

// f(r,t) = p r^2 + h(t), h(t) = a (t - T)^2.
struct ProfileParabola {
  double p;
  double a;
  double T;

  double h(double t) const { return a * (t - T) * (t - T); }
  double operator()(double r, double t) const { return p * r * r + h(t); }
};

ProfileParabola profile_parabola(double f0, double v0, CurvatureSign sign = CurvatureSign::Negative);

// YM41: (rhs - fddot)(f + r^2) for the negative-curvature profile.
// CP1Q2: (fddot - rhs)(f^2 + r^4) for the same profile.
double profile_residual(ModelKind model, double f0, double v0, double r, double t);

double kinetic_norm_q1(double f, double R);

// Cumulative integral G(f) = int_f^f0 sqrt(kinetic_norm_q1(x, R)) dx on a
// geometric grid in f, with per-interval adaptive Simpson.
class CollapseIntegral {
 public:
  CollapseIntegral(double f0, double R, std::size_t intervals = 400, double tol = 1e-10);

  double f0() const { return f0_; }
  double total() const { return total_; }
  double G(double f) const;
  // Inverse of G: the f in (0, f0] with G(f) = s. Requires 0 <= s < total().
  double invert(double s) const;

 private:
  double f0_, R_, tol_;
  std::vector<double> f_;  // decreasing from f0
  std::vector<double> g_;  // G(f_i), increasing
  double total_;
};

struct TrajectoryPoint {
  double t;
  double f;
  bool collapsed;  // t beyond the total collapse time; f reported as 0
};

struct LagrangianTrajectory {
  double c;
  double R_eff;
  double collapse_time;
  std::vector<TrajectoryPoint> points;
};

LagrangianTrajectory trajectory_q1(double f0, double c, double R, std::span<const double> times,
                                   std::size_t intervals = 400);

struct CRWindow {
  double skip_start = 0.1;  // fraction of the run duration dropped at each end
  double skip_end = 0.1;
};

struct CRExtraction {
  double c;
  double R_eff;
  LineFit line;  // 1/fdot^2 against ln f
  std::size_t points;
};

// Centered differences of the trace give fdot; the trace must be uniformly
// spaced in t.
CRExtraction extract_c_R(std::span<const TracePoint> trace, const CRWindow& window = {});

// c and R_eff from a regression line y = m x + b of 1/fdot^2 on ln f.
CRExtraction c_R_from_line(const LineFit& line);

struct EmpiricalLineLaw {
  double T;
  double m;
};

EmpiricalLineLaw empirical_line_law_q1(double f0, double v0);

}  // namespace collapse
