#pragma once

#include <span>
#include <vector>

#include "collapse/core.hpp"

namespace collapse {

struct StencilQuery {
  std::size_t q;
  std::span<const double> samples;
  double fdot;
  const RadialGrid& grid;
};

// Exponent n of the radial operator r^-n d/dr r^n d/dr used by each model.
int radial_exponent(ModelKind m);

double natural_radial_operator(std::span<const double> samples, std::size_t q, int n, double dr);

// Full right-hand side fddot at an interior node. Throws
// Error(degenerate_denominator) instead of returning a non-finite value.
double eval_rhs(ModelKind model, const StencilQuery& query);

namespace detail {
struct StencilCoeffs {
  double wp, wm;      // (r+d/2)^n, (r-d/2)^n
  double scale;       // 1/(r^n d^2)
  double drift;       // coefficient of f' in the first-order term
  double rpow;        // r^2 (YM41, CP1Q1) or r^4 (CP1Q2)
};
}  // namespace detail

// Per-grid table of the stencil weights so that a time step does not
// recompute powers of r. Produces bit-identical values to eval_rhs.
class RhsTable {
 public:
  RhsTable(ModelKind model, const RadialGrid& grid);

  double operator()(std::span<const double> f, std::size_t q, double fdot) const;

  ModelKind model() const { return model_; }

 private:
  ModelKind model_;
  double dr_;
  std::vector<detail::StencilCoeffs> coeffs_;
};

}  // namespace collapse
