#include "collapse/models.hpp"

#include <cmath>
#include <string>

namespace collapse {

namespace {

double ipow(double x, int n) {
  double y = 1.0;
  for (int i = 0; i < n; ++i) y *= x;
  return y;
}

using NodeCoeffs = detail::StencilCoeffs;

NodeCoeffs node_coeffs(ModelKind m, double r, double dr) {
  const int n = radial_exponent(m);
  NodeCoeffs c;
  c.wp = ipow(r + 0.5 * dr, n);
  c.wm = ipow(r - 0.5 * dr, n);
  c.scale = 1.0 / (ipow(r, n) * dr * dr);
  switch (m) {
    case ModelKind::YM41:
      c.drift = 8.0 * r;
      c.rpow = r * r;
      break;
    case ModelKind::CP1Q1:
      c.drift = 4.0 * r;
      c.rpow = r * r;
      break;
    case ModelKind::CP1Q2:
      c.drift = 8.0 * r * r * r;
      c.rpow = r * r * r * r;
      break;
  }
  return c;
}

inline double radial_kernel(double fm, double fc, double fp, const NodeCoeffs& c) {
  return (c.wp * (fp - fc) - c.wm * (fc - fm)) * c.scale;
}

[[noreturn]] void degenerate(ModelKind m, std::size_t q) {
  raise(ErrorCode::degenerate_denominator,
        std::string(model_name(m)) + ": vanishing denominator at node " + std::to_string(q));
}

inline double full_rhs(ModelKind m, const NodeCoeffs& c, std::span<const double> f, std::size_t q, double fdot,
                       double d) {
  const double fm = f[q - 1], fc = f[q], fp = f[q + 1];
  const double lap = radial_kernel(fm, fc, fp, c);
  const double fr = (fp - fm) / (2.0 * d);
  const double kin = fdot * fdot - fr * fr;
  if (m == ModelKind::YM41) {
    const double den = fc + c.rpow;
    if (den == 0.0) degenerate(m, q);
    return lap + (2.0 * kin - c.drift * fr) / den;
  }
  const double den = fc * fc + c.rpow;
  if (den == 0.0) degenerate(m, q);
  return lap + (2.0 * fc * kin - c.drift * fr) / den;
}

void check_interior(std::size_t q, std::size_t size) {
  if (q == 0 || q + 1 >= size)
    raise(ErrorCode::invalid_argument, "stencil: node " + std::to_string(q) + " is not interior");
}

}  // namespace

int radial_exponent(ModelKind m) { return m == ModelKind::CP1Q1 ? 3 : 5; }

double natural_radial_operator(std::span<const double> samples, std::size_t q, int n, double dr) {
  check_interior(q, samples.size());
  if (n != 3 && n != 5) raise(ErrorCode::invalid_argument, "stencil: exponent must be 3 or 5");
  if (!(dr > 0.0)) raise(ErrorCode::invalid_argument, "stencil: dr must be positive");
  const double r = static_cast<double>(q) * dr;
  NodeCoeffs c{};
  c.wp = ipow(r + 0.5 * dr, n);
  c.wm = ipow(r - 0.5 * dr, n);
  c.scale = 1.0 / (ipow(r, n) * dr * dr);
  return radial_kernel(samples[q - 1], samples[q], samples[q + 1], c);
}

double eval_rhs(ModelKind model, const StencilQuery& query) {
  check_interior(query.q, query.samples.size());
  const double d = query.grid.dr;
  const NodeCoeffs c = node_coeffs(model, query.grid.radius(query.q), d);
  const double v = full_rhs(model, c, query.samples, query.q, query.fdot, d);
  if (!std::isfinite(v))
    raise(ErrorCode::degenerate_denominator,
          std::string(model_name(model)) + ": non-finite right-hand side at node " + std::to_string(query.q));
  return v;
}

RhsTable::RhsTable(ModelKind model, const RadialGrid& grid)
    : model_(model), dr_(grid.dr), coeffs_(grid.node_count) {
  for (std::size_t q = 1; q + 1 < grid.node_count; ++q) coeffs_[q] = node_coeffs(model, grid.radius(q), dr_);
}

double RhsTable::operator()(std::span<const double> f, std::size_t q, double fdot) const {
  return full_rhs(model_, coeffs_[q], f, q, fdot, dr_);
}

}  // namespace collapse
