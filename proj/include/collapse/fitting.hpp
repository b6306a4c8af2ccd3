#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "collapse/core.hpp"

namespace collapse {

struct Point {
  double x;
  double y;
};

struct LineFit {
  double m = 0.0;
  double b = 0.0;
  double rms = 0.0;

  // Abscissa where the line crosses zero.
  double zero_crossing() const { return -b / m; }
};

struct ParabolaFit {
  double a = 0.0;
  double T = 0.0;
  double offset = 0.0;
  double rms = 0.0;

  double operator()(double t) const { return a * (t - T) * (t - T) + offset; }
};

// y = c x^2, the law used for the vertical semi-axis b(t) = c t^2.
struct SquareLawFit {
  double c = 0.0;
  double rms = 0.0;
};

struct EllipseFit {
  double a = 0.0;
  double b = 0.0;
  double k = 0.0;
  double rms = 0.0;
};

struct HyperbolaFit {
  double a = 0.0;
  double b = 0.0;
  double k = 0.0;
  double rms = 0.0;

  double asymptotic_slope() const { return -b / a; }
};

LineFit fit_line(std::span<const Point> pts);
ParabolaFit fit_parabola_vertex(std::span<const Point> pts);
SquareLawFit fit_square_law(std::span<const Point> pts);

// Both conic fitters solve y^2 = A + B x^2 + C y in least squares and
// complete the square. The reported rms is the algebraic residual of the
// fitted conic divided by 2b, which approximates the vertical distance near
// the vertex.
EllipseFit fit_ellipse(std::span<const Point> pts);
HyperbolaFit fit_hyperbola(std::span<const Point> pts);

namespace window {
struct AfterFraction {
  double phi;
};
struct TimeRange {
  double t1, t2;
};
struct BeforeBoundaryHit {
  double a_max;
};
}  // namespace window

using WindowMode = std::variant<window::AfterFraction, window::TimeRange, window::BeforeBoundaryHit>;

std::string describe(const WindowMode& mode);

// AfterFraction keeps points with y <= phi*y(first); TimeRange keeps
// t1 <= x <= t2; BeforeBoundaryHit keeps points with y < a_max (y is a
// fitted semi-axis series).
std::vector<Point> select_fit_window(std::span<const Point> series, const WindowMode& mode);

std::vector<Point> to_points(std::span<const TracePoint> trace);

// Points of a time slice that belong to the bump at the origin: the
// contiguous run from r=0 whose height above the outer sample is at least
// height_fraction of the bump height at the origin.
std::vector<Point> bump_points(std::span<const double> samples, const RadialGrid& grid, double height_fraction);

struct SliceEllipse {
  double t;
  EllipseFit fit;
};

struct EllipseEvolution {
  std::vector<SliceEllipse> slices;
  LineFit a_line;
  SquareLawFit b_law;
  LineFit k_line;
};

struct SliceHyperbola {
  double t;
  HyperbolaFit fit;
};

struct HyperbolaEvolution {
  std::vector<SliceHyperbola> slices;
  LineFit slope_line;  // -b/a against t
};

struct SliceFitOptions {
  double height_fraction = 0.05;
  double t_min = 0.0;       // earlier slices are too small to fit reliably
  double a_max = 0.0;       // BeforeBoundaryHit bound; <= 0 disables
  std::size_t min_points = 5;
};

EllipseEvolution fit_ellipse_evolution(std::span<const Snapshot> slices, const RadialGrid& grid,
                                       const SliceFitOptions& opt);
HyperbolaEvolution fit_hyperbola_evolution(std::span<const Snapshot> slices, const RadialGrid& grid,
                                           const SliceFitOptions& opt);

}  // namespace collapse
