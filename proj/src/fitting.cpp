#include "collapse/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace collapse {

namespace {

[[noreturn]] void degenerate(const std::string& what) { raise(ErrorCode::degenerate_fit, what); }

void require_finite(std::span<const Point> pts, const char* who) {
  for (const Point& p : pts)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      raise(ErrorCode::invalid_argument, std::string(who) + ": non-finite point");
}

struct Frame {
  double sx = 1.0, y0 = 0.0, sy = 1.0;
};

double spread(std::span<const Point> pts, double Point::*field, double center) {
  double s = 0.0;
  for (const Point& p : pts) s = std::max(s, std::abs(p.*field - center));
  return s > 0.0 ? s : 1.0;
}

double mean(std::span<const Point> pts, double Point::*field) {
  double s = 0.0;
  for (const Point& p : pts) s += p.*field;
  return s / static_cast<double>(pts.size());
}

double rms_of(const Eigen::VectorXd& r) { return std::sqrt(r.squaredNorm() / static_cast<double>(r.size())); }

Eigen::VectorXd lstsq(const Eigen::MatrixXd& D, const Eigen::VectorXd& y, const char* who) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D);
  qr.setThreshold(1e-13);
  if (qr.rank() < D.cols()) degenerate(std::string(who) + ": rank-deficient design");
  return qr.solve(y);
}

struct ConicCoeffs {
  double A, B, C;  // y^2 = A + B x^2 + C y in the normalized frame
  Frame fr;
};

ConicCoeffs fit_conic(std::span<const Point> pts, const char* who) {
  require_finite(pts, who);
  if (pts.size() < 3) degenerate(std::string(who) + ": need at least 3 points");
  std::vector<double> xs2;
  for (const Point& p : pts) xs2.push_back(p.x * p.x);
  std::sort(xs2.begin(), xs2.end());
  if (std::unique(xs2.begin(), xs2.end()) - xs2.begin() < 3)
    degenerate(std::string(who) + ": need 3 distinct x^2 values");

  // The conic form is translation invariant in y, so fit about the mean to
  // avoid A ~ -k^2 cancelling against k^2.
  Frame fr;
  fr.y0 = mean(pts, &Point::y);
  fr.sy = spread(pts, &Point::y, fr.y0);
  fr.sx = spread(pts, &Point::x, 0.0);
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd D(n, 3);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double X = pts[i].x / fr.sx, U = (pts[i].y - fr.y0) / fr.sy;
    D(i, 0) = 1.0;
    D(i, 1) = X * X;
    D(i, 2) = U;
    rhs(i) = U * U;
  }
  const Eigen::VectorXd c = lstsq(D, rhs, who);
  return {c(0), c(1), c(2), fr};
}

template <class Fit>
Fit complete_square(const ConicCoeffs& cc, std::span<const Point> pts, double sign, const char* who) {
  const double ku = cc.C / 2.0;
  const double bu2 = cc.A + ku * ku;
  if (!(bu2 > 0.0)) degenerate(std::string(who) + ": negative b^2");
  const double au2 = -sign * bu2 / cc.B;
  Fit f;
  f.k = cc.fr.y0 + cc.fr.sy * ku;
  f.b = cc.fr.sy * std::sqrt(bu2);
  f.a = cc.fr.sx * std::sqrt(au2);
  double ss = 0.0;
  for (const Point& p : pts) {
    const double u = (p.y - f.k) / f.b, x = p.x / f.a;
    const double g = u * u + sign * x * x - 1.0;
    ss += std::pow(g * f.b / 2.0, 2);
  }
  f.rms = std::sqrt(ss / static_cast<double>(pts.size()));
  return f;
}

}  // namespace

LineFit fit_line(std::span<const Point> pts) {
  require_finite(pts, "fit_line");
  if (pts.size() < 2) degenerate("fit_line: need at least 2 points");
  const double mx = mean(pts, &Point::x), my = mean(pts, &Point::y);
  double sxx = 0.0, sxy = 0.0;
  for (const Point& p : pts) {
    sxx += (p.x - mx) * (p.x - mx);
    sxy += (p.x - mx) * (p.y - my);
  }
  if (!(sxx > 0.0)) degenerate("fit_line: all abscissae equal");
  LineFit f;
  f.m = sxy / sxx;
  f.b = my - f.m * mx;
  double ss = 0.0;
  for (const Point& p : pts) ss += std::pow(p.y - f.m * p.x - f.b, 2);
  f.rms = std::sqrt(ss / static_cast<double>(pts.size()));
  return f;
}

ParabolaFit fit_parabola_vertex(std::span<const Point> pts) {
  require_finite(pts, "fit_parabola_vertex");
  if (pts.size() < 3) degenerate("fit_parabola_vertex: need at least 3 points");
  const double x0 = mean(pts, &Point::x), sx = spread(pts, &Point::x, x0);
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd D(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = (pts[i].x - x0) / sx;
    D(i, 0) = u * u;
    D(i, 1) = u;
    D(i, 2) = 1.0;
    y(i) = pts[i].y;
  }
  const Eigen::VectorXd c = lstsq(D, y, "fit_parabola_vertex");
  if (c(0) == 0.0 || std::abs(c(0)) <= 1e-14 * c.cwiseAbs().maxCoeff())
    degenerate("fit_parabola_vertex: zero curvature, data is a line");
  // In the scaled variable u: alpha u^2 + beta u + gamma, vertex at -beta/(2 alpha).
  ParabolaFit f;
  f.a = c(0) / (sx * sx);
  f.T = x0 - sx * c(1) / (2.0 * c(0));
  f.offset = c(2) - c(1) * c(1) / (4.0 * c(0));
  f.rms = rms_of(D * c - y);
  return f;
}

SquareLawFit fit_square_law(std::span<const Point> pts) {
  require_finite(pts, "fit_square_law");
  double num = 0.0, den = 0.0;
  for (const Point& p : pts) {
    const double x2 = p.x * p.x;
    num += p.y * x2;
    den += x2 * x2;
  }
  if (!(den > 0.0)) degenerate("fit_square_law: need a nonzero abscissa");
  SquareLawFit f;
  f.c = num / den;
  double ss = 0.0;
  for (const Point& p : pts) ss += std::pow(p.y - f.c * p.x * p.x, 2);
  f.rms = std::sqrt(ss / static_cast<double>(pts.size()));
  return f;
}

EllipseFit fit_ellipse(std::span<const Point> pts) {
  const ConicCoeffs cc = fit_conic(pts, "fit_ellipse");
  if (!(cc.B < 0.0)) degenerate("fit_ellipse: B >= 0, data is not elliptical");
  return complete_square<EllipseFit>(cc, pts, 1.0, "fit_ellipse");
}

HyperbolaFit fit_hyperbola(std::span<const Point> pts) {
  const ConicCoeffs cc = fit_conic(pts, "fit_hyperbola");
  if (!(cc.B > 0.0)) degenerate("fit_hyperbola: B <= 0, data is not hyperbolic");
  return complete_square<HyperbolaFit>(cc, pts, -1.0, "fit_hyperbola");
}

std::string describe(const WindowMode& mode) {
  std::ostringstream os;
  os.precision(12);
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, window::AfterFraction>)
          os << "AfterFraction(" << m.phi << ")";
        else if constexpr (std::is_same_v<M, window::TimeRange>)
          os << "TimeRange(" << m.t1 << ";" << m.t2 << ")";
        else
          os << "BeforeBoundaryHit(" << m.a_max << ")";
      },
      mode);
  return os.str();
}

std::vector<Point> select_fit_window(std::span<const Point> series, const WindowMode& mode) {
  if (series.empty()) raise(ErrorCode::invalid_argument, "select_fit_window: empty series");
  std::vector<Point> out;
  const double y_first = series.front().y;
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        for (const Point& p : series) {
          bool keep;
          if constexpr (std::is_same_v<M, window::AfterFraction>)
            keep = p.y <= m.phi * y_first;
          else if constexpr (std::is_same_v<M, window::TimeRange>)
            keep = p.x >= m.t1 && p.x <= m.t2;
          else
            keep = p.y < m.a_max;
          if (keep) out.push_back(p);
        }
      },
      mode);
  if (out.empty()) raise(ErrorCode::degenerate_fit, "select_fit_window: " + describe(mode) + " keeps no points");
  return out;
}

std::vector<Point> to_points(std::span<const TracePoint> trace) {
  std::vector<Point> out;
  out.reserve(trace.size());
  for (const TracePoint& p : trace) out.push_back({p.t, p.f});
  return out;
}

std::vector<Point> bump_points(std::span<const double> f, const RadialGrid& grid, double height_fraction) {
  std::vector<Point> out;
  if (f.size() < 2) return out;
  const double tail = f.back();
  const double height = f.front() - tail;
  if (height == 0.0) return out;
  for (std::size_t q = 0; q < f.size(); ++q) {
    if ((f[q] - tail) / height < height_fraction) break;
    out.push_back({grid.radius(q), f[q]});
  }
  return out;
}

namespace {

template <class Fit, class Slice, class Fitter>
std::vector<Slice> fit_slices(std::span<const Snapshot> slices, const RadialGrid& grid, const SliceFitOptions& opt,
                              Fitter fitter) {
  std::vector<Slice> out;
  for (const Snapshot& s : slices) {
    if (s.t < opt.t_min) continue;
    const std::vector<Point> pts = bump_points(s.f, grid, opt.height_fraction);
    if (pts.size() < opt.min_points) continue;
    Fit fit;
    try {
      fit = fitter(pts);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::degenerate_fit) throw;
      continue;
    }
    if (opt.a_max > 0.0 && !(fit.a < opt.a_max)) continue;
    out.push_back({s.t, fit});
  }
  if (out.size() < 2) degenerate("slice fits: fewer than 2 usable slices");
  return out;
}

}  // namespace

EllipseEvolution fit_ellipse_evolution(std::span<const Snapshot> slices, const RadialGrid& grid,
                                       const SliceFitOptions& opt) {
  EllipseEvolution ev;
  ev.slices = fit_slices<EllipseFit, SliceEllipse>(slices, grid, opt,
                                                   [](std::span<const Point> p) { return fit_ellipse(p); });
  std::vector<Point> a, b, k;
  for (const SliceEllipse& s : ev.slices) {
    a.push_back({s.t, s.fit.a});
    b.push_back({s.t, s.fit.b});
    k.push_back({s.t, s.fit.k});
  }
  ev.a_line = fit_line(a);
  ev.b_law = fit_square_law(b);
  ev.k_line = fit_line(k);
  return ev;
}

HyperbolaEvolution fit_hyperbola_evolution(std::span<const Snapshot> slices, const RadialGrid& grid,
                                           const SliceFitOptions& opt) {
  HyperbolaEvolution ev;
  ev.slices = fit_slices<HyperbolaFit, SliceHyperbola>(slices, grid, opt,
                                                       [](std::span<const Point> p) { return fit_hyperbola(p); });
  std::vector<Point> s;
  for (const SliceHyperbola& h : ev.slices) s.push_back({h.t, h.fit.asymptotic_slope()});
  ev.slope_line = fit_line(s);
  return ev;
}

}  // namespace collapse
