#pragma once

#include <complex>
#include <limits>
#include <span>
#include <vector>

#include "collapse/core.hpp"

namespace collapse {

using cplx = std::complex<double>;

struct TridiagonalMatrix {
  std::vector<double> diag;
  std::vector<double> sub;    // sub[i] = a(i+1, i)
  std::vector<double> super;  // super[i] = a(i, i+1)

  std::size_t order() const { return diag.size(); }
  double at(std::size_t i, std::size_t j) const;
};

struct StabilityContext {
  ModelKind model = ModelKind::YM41;
  std::size_t n = 5;
  double f0 = 1.0;
  double fdot0 = 0.0;
  double dr = 0.01;

  // c in the near-origin approximation L2 ~ c I.
  double lift_constant() const;
};

struct Spectrum {
  std::vector<cplx> eigenvalues;  // ascending real part
};

// Rows are 1-based in the usual notation; row 1 folds the origin rule
// f(0) = 4/3 f(1) - 1/3 f(2) into the first two columns.
TridiagonalMatrix build_linearized_matrix(const StabilityContext& ctx);

// Balancing followed by Hessenberg QR with implicit shifts (Eigen's real
// Schur), iteration cap 100 n. Throws Error(no_convergence).
Spectrum eigenvalues(const TridiagonalMatrix& m);

// Roots of lambda^2 - c lambda - alpha = 0, (c + s)/2 first.
std::pair<cplx, cplx> lift_eigenvalue(cplx alpha, double c);

struct VNQuery {
  ModelKind model = ModelKind::YM41;
  double kappa = 0.0;
  double r = 1.0;
  double f0 = 1.0;
  double dr = 0.01;
  double dt = 1e-4;
};

struct VNResult {
  cplx J;
  cplx x_plus, x_minus;
  cplx omega_plus, omega_minus;
  double growth_plus, growth_minus;
};

VNResult von_neumann(const VNQuery& q);

struct SpectrumReport {
  std::size_t contexts = 0;
  double max_real = -std::numeric_limits<double>::infinity();
  std::vector<StabilityContext> violations;  // contexts with some Re(alpha) >= 0
  bool all_negative() const { return violations.empty(); }
};

SpectrumReport negative_spectrum_check(std::span<const StabilityContext> contexts);

}  // namespace collapse
