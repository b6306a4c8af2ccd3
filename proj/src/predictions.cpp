#include "collapse/predictions.hpp"

#include <algorithm>
#include <cmath>

namespace collapse {

namespace {

void require_collapse_inputs(double f0, double v0, const char* who) {
  if (!(f0 > 0.0) || !std::isfinite(f0)) raise(ErrorCode::invalid_argument, std::string(who) + ": f0 must be positive");
  if (v0 == 0.0 || !std::isfinite(v0))
    raise(ErrorCode::invalid_argument, std::string(who) + ": v0 = 0 predicts no collapse");
}

double simpson(double fa, double fm, double fb, double h) { return h / 6.0 * (fa + 4.0 * fm + fb); }

template <class F>
double adaptive_simpson(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                        int depth) {
  const double m = 0.5 * (a + b);
  const double lm = f(0.5 * (a + m)), rm = f(0.5 * (m + b));
  const double left = simpson(fa, lm, fm, m - a), right = simpson(fm, rm, fb, b - m);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, lm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, rm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double integrate(F f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return adaptive_simpson(f, a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, 48);
}

// Geometric grid stops at f0 * kFloor; below that sqrt(K) ~ sqrt(2 ln(R/f))
// and the remainder integrates in closed form to leading order.
constexpr double kFloor = 1e-12;

}  // namespace

PredictedParabola predict_parabola(ModelKind model, double f0, double v0) {
  if (model == ModelKind::CP1Q1)
    raise(ErrorCode::invalid_argument, "predict_parabola: CP1Q1 has no parabolic prediction");
  require_collapse_inputs(f0, v0, "predict_parabola");
  return {v0 * v0 / (4.0 * f0), 2.0 * f0 / std::abs(v0)};
}

ProfileParabola profile_parabola(double f0, double v0, CurvatureSign sign) {
  require_collapse_inputs(f0, v0, "profile_parabola");
  const double mag = v0 * v0 / (8.0 * f0);
  return {sign == CurvatureSign::Negative ? -mag : mag, v0 * v0 / (4.0 * f0), 2.0 * f0 / std::abs(v0)};
}

double profile_residual(ModelKind model, double f0, double v0, double r, double t) {
  require_collapse_inputs(f0, v0, "profile_residual");
  const double A = v0 * v0 / (4.0 * f0);
  switch (model) {
    case ModelKind::YM41:
      return 2.0 * A * A * r * r;
    case ModelKind::CP1Q2: {
      const double tau = t - 2.0 * f0 / std::abs(v0);
      const double v6 = std::pow(v0, 6), f3 = f0 * f0 * f0;
      return v6 * std::pow(r, 4) / (64.0 * f3) - v6 * r * r * tau * tau / (32.0 * f3);
    }
    case ModelKind::CP1Q1:
      break;
  }
  raise(ErrorCode::invalid_argument, "profile_residual: CP1Q1 has no parabolic profile");
}

double kinetic_norm_q1(double f, double R) {
  if (!(f > 0.0) || !(R > 0.0)) raise(ErrorCode::invalid_argument, "kinetic_norm_q1: f and R must be positive");
  const double x = (R / f) * (R / f);
  if (x < 1e-3) {
    // ln(1+x) - x/(1+x) = sum_{k>=2} (-1)^k (k-1)/k x^k
    double term = x, sum = 0.0;
    for (int k = 2; k <= 8; ++k) {
      term *= -x;
      sum += -term * (k - 1) / k;
    }
    return sum;
  }
  return std::log1p(x) - x / (1.0 + x);
}

CollapseIntegral::CollapseIntegral(double f0, double R, std::size_t intervals, double tol)
    : f0_(f0), R_(R), tol_(tol) {
  if (!(f0 > 0.0) || !(R > 0.0)) raise(ErrorCode::invalid_argument, "trajectory: f0 and R must be positive");
  if (intervals < 1) raise(ErrorCode::invalid_argument, "trajectory: need at least one interval");
  auto sqrtK = [R](double f) { return std::sqrt(kinetic_norm_q1(f, R)); };
  const double ratio = std::pow(kFloor, 1.0 / static_cast<double>(intervals));
  f_.resize(intervals + 1);
  g_.resize(intervals + 1);
  f_[0] = f0;
  g_[0] = 0.0;
  const double piece_tol = tol / static_cast<double>(intervals);
  for (std::size_t i = 1; i <= intervals; ++i) {
    f_[i] = i == intervals ? f0 * kFloor : f_[i - 1] * ratio;
    g_[i] = g_[i - 1] + integrate(sqrtK, f_[i], f_[i - 1], piece_tol);
  }
  const double eps = f_.back(), k = kinetic_norm_q1(eps, R);
  total_ = g_.back() + eps * (std::sqrt(k) + 1.0 / std::sqrt(k));
}

double CollapseIntegral::G(double f) const {
  if (!(f > 0.0) || f > f0_) raise(ErrorCode::invalid_argument, "trajectory: f outside (0, f0]");
  auto sqrtK = [this](double x) { return std::sqrt(kinetic_norm_q1(x, R_)); };
  // First grid node at or below f.
  const auto it = std::lower_bound(f_.begin(), f_.end(), f, std::greater<double>());
  if (it == f_.end()) {
    const double k = kinetic_norm_q1(f, R_);
    return total_ - f * (std::sqrt(k) + 1.0 / std::sqrt(k));
  }
  const std::size_t i = static_cast<std::size_t>(it - f_.begin());
  if (*it == f) return g_[i];
  return g_[i - 1] + integrate(sqrtK, f, f_[i - 1], tol_ / static_cast<double>(f_.size()));
}

double CollapseIntegral::invert(double s) const {
  if (!(s >= 0.0) || !(s < total_)) raise(ErrorCode::invalid_argument, "trajectory: s outside [0, total)");
  if (s == 0.0) return f0_;
  // g_[i-1] <= s < g_[i]; past the table the root lies in the tail below the floor.
  const std::size_t i = static_cast<std::size_t>(std::upper_bound(g_.begin(), g_.end(), s) - g_.begin());
  double hi, lo, f;
  if (i == g_.size()) {
    hi = f_.back();
    lo = 0.0;
    f = 0.5 * hi;
  } else {
    hi = f_[i - 1];
    lo = f_[i];
    f = lo + (hi - lo) * (g_[i] - s) / (g_[i] - g_[i - 1]);
  }
  // Linear interpolation seeds a safeguarded Newton iteration; dG/df = -sqrt(K).
  const double tol = 1e-12 * f0_;
  for (int iter = 0; iter < 200; ++iter) {
    const double r = G(f) - s;  // decreasing in f
    if (r > 0.0)
      lo = f;
    else
      hi = f;
    double next = f + r / std::sqrt(kinetic_norm_q1(f, R_));
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - f) <= tol || hi - lo <= tol) return next;
    f = next;
  }
  raise(ErrorCode::no_convergence, "trajectory: inversion did not converge");
}

LagrangianTrajectory trajectory_q1(double f0, double c, double R, std::span<const double> times,
                                   std::size_t intervals) {
  if (!(c > 0.0)) raise(ErrorCode::invalid_argument, "trajectory: c must be positive");
  const CollapseIntegral integral(f0, R, intervals);
  LagrangianTrajectory out{c, R, integral.total() / c, {}};
  double prev = -1.0;
  for (double t : times) {
    if (!(t >= 0.0) || t <= prev) raise(ErrorCode::invalid_argument, "trajectory: times must increase from 0");
    prev = t;
    const double s = c * t;
    if (s >= integral.total())
      out.points.push_back({t, 0.0, true});
    else
      out.points.push_back({t, integral.invert(s), false});
  }
  return out;
}

CRExtraction c_R_from_line(const LineFit& line) {
  if (!(line.m < 0.0)) raise(ErrorCode::degenerate_fit, "extract_c_R: slope m >= 0, no collapse signature");
  return {std::sqrt(-2.0 / line.m), std::exp(-line.b / line.m + 0.5), line, 0};
}

CRExtraction extract_c_R(std::span<const TracePoint> trace, const CRWindow& w) {
  if (trace.size() < 5) raise(ErrorCode::invalid_argument, "extract_c_R: trace too short");
  if (!(w.skip_start >= 0.0 && w.skip_end >= 0.0 && w.skip_start + w.skip_end < 1.0))
    raise(ErrorCode::invalid_argument, "extract_c_R: window fractions must leave a nonempty range");
  const double t0 = trace.front().t, t1 = trace.back().t, span = t1 - t0;
  const double lo = t0 + w.skip_start * span, hi = t1 - w.skip_end * span;
  std::vector<Point> pts;
  for (std::size_t i = 1; i + 1 < trace.size(); ++i) {
    const double t = trace[i].t;
    if (t < lo || t > hi) continue;
    if (!(trace[i].f > 0.0)) raise(ErrorCode::degenerate_fit, "extract_c_R: f <= 0 inside window");
    const double fdot = (trace[i + 1].f - trace[i - 1].f) / (trace[i + 1].t - trace[i - 1].t);
    if (fdot == 0.0) raise(ErrorCode::degenerate_fit, "extract_c_R: fdot = 0 inside window");
    pts.push_back({std::log(trace[i].f), 1.0 / (fdot * fdot)});
  }
  CRExtraction out = c_R_from_line(fit_line(pts));
  out.points = pts.size();
  return out;
}

EmpiricalLineLaw empirical_line_law_q1(double f0, double v0) {
  require_collapse_inputs(f0, v0, "empirical_line_law_q1");
  return {1.2 * f0 / std::abs(v0), -0.75 * std::abs(v0)};
}

}  // namespace collapse
