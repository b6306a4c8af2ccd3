#include "collapse/stability.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace collapse {

double TridiagonalMatrix::at(std::size_t i, std::size_t j) const {
  if (i == j) return diag.at(i);
  if (i == j + 1) return sub.at(j);
  if (j == i + 1) return super.at(i);
  return 0.0;
}

double StabilityContext::lift_constant() const {
  if (model == ModelKind::YM41) return 4.0 * fdot0 / f0;
  return 4.0 * f0 * fdot0 / (dr * dr + f0 * f0);
}

namespace {

void check_context(const StabilityContext& c) {
  if (c.model == ModelKind::CP1Q2)
    raise(ErrorCode::invalid_argument, "stability: linearized matrices exist for YM41 and CP1Q1 only");
  if (!(c.f0 > 0.0) || !(c.dr > 0.0) || c.n < 2 || !std::isfinite(c.fdot0))
    raise(ErrorCode::invalid_argument, "stability: need f0 > 0, dr > 0, n >= 2");
}

TridiagonalMatrix ym41_matrix(const StabilityContext& c) {
  const std::size_t n = c.n;
  const double F = c.f0, h2 = c.dr * c.dr, kin = 2.0 * (c.fdot0 / F) * (c.fdot0 / F);
  auto p5 = [](double x) { return x * x * x * x * x; };
  TridiagonalMatrix m{std::vector<double>(n), std::vector<double>(n - 1), std::vector<double>(n - 1)};
  const double origin = 4.0 / F + p5(0.5) / h2;
  m.diag[0] = 4.0 / 3.0 * origin + (-p5(1.5) - p5(0.5)) / h2 - kin;
  m.super[0] = -1.0 / 3.0 * origin - 4.0 / F + p5(1.5) / h2;
  for (std::size_t i = 1; i < n; ++i) {
    const double k = static_cast<double>(i + 1), k5 = p5(k);
    m.sub[i - 1] = 4.0 * k / F + p5(k - 0.5) / (k5 * h2);
    m.diag[i] = (-p5(k + 0.5) - p5(k - 0.5)) / (k5 * h2) - kin;
    if (i + 1 < n) m.super[i] = -4.0 * k / F + p5(k + 0.5) / (k5 * h2);
  }
  return m;
}

TridiagonalMatrix cp1q1_matrix(const StabilityContext& c) {
  const std::size_t n = c.n;
  const double F = c.f0, D = c.fdot0, h = c.dr, h2 = h * h;
  auto p3 = [](double x) { return x * x * x; };
  TridiagonalMatrix m{std::vector<double>(n), std::vector<double>(n - 1), std::vector<double>(n - 1)};
  const double den1 = h2 + F * F;
  const double origin = p3(0.5) / h2 + 2.0 * h / den1;
  // The last term keeps the unsquared denominator exactly as printed for row 1.
  m.diag[0] = 4.0 / 3.0 * origin - p3(1.5) / h2 - p3(0.5) / h2 + 2.0 * D * D / den1 - 4.0 * F * F * D * D / den1;
  m.super[0] = -1.0 / 3.0 * origin + p3(1.5) / h2 - 2.0 * h / den1;
  for (std::size_t i = 1; i < n; ++i) {
    const double k = static_cast<double>(i + 1), k3 = p3(k);
    const double den = k * k * h2 + F * F;
    m.sub[i - 1] = p3(k - 0.5) / (k3 * h2) + 2.0 * k * k * h / den;
    m.diag[i] = -p3(k + 0.5) / (k3 * h2) - p3(k - 0.5) / (k3 * h2) + 2.0 * D * D / den -
                4.0 * F * F * D * D / (den * den);
    if (i + 1 < n) m.super[i] = p3(k + 0.5) / (k3 * h2) - 2.0 * k * k * h / den;
  }
  return m;
}

// Diagonal similarity by powers of two so row and column norms are comparable.
void balance(Eigen::MatrixXd& A) {
  const Eigen::Index n = A.rows();
  constexpr double radix = 2.0;
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (j != i) {
          c += std::abs(A(j, i));
          r += std::abs(A(i, j));
        }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix, f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        A.row(i) /= f;
        A.col(i) *= f;
      }
    }
  }
}

}  // namespace

TridiagonalMatrix build_linearized_matrix(const StabilityContext& ctx) {
  check_context(ctx);
  return ctx.model == ModelKind::YM41 ? ym41_matrix(ctx) : cp1q1_matrix(ctx);
}

Spectrum eigenvalues(const TridiagonalMatrix& m) {
  const std::size_t n = m.order();
  if (n == 0 || n > 128) raise(ErrorCode::invalid_argument, "eigenvalues: order must be in 1..128");
  if (m.sub.size() + 1 != n || m.super.size() + 1 != n)
    raise(ErrorCode::invalid_argument, "eigenvalues: band lengths must be n-1");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    A(ii, ii) = m.diag[i];
    if (i + 1 < n) {
      A(ii + 1, ii) = m.sub[i];
      A(ii, ii + 1) = m.super[i];
    }
  }
  if (!A.allFinite()) raise(ErrorCode::invalid_argument, "eigenvalues: non-finite entry");
  balance(A);
  Eigen::EigenSolver<Eigen::MatrixXd> es;
  es.setMaxIterations(static_cast<Eigen::Index>(100 * n));
  es.compute(A, false);
  if (es.info() != Eigen::Success) raise(ErrorCode::no_convergence, "eigenvalues: QR iteration cap reached");
  Spectrum s;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) s.eigenvalues.push_back(es.eigenvalues()(i));
  std::sort(s.eigenvalues.begin(), s.eigenvalues.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return s;
}

std::pair<cplx, cplx> lift_eigenvalue(cplx alpha, double c) {
  const cplx s = std::sqrt(cplx(c * c) + 4.0 * alpha);
  return {(c + s) / 2.0, (c - s) / 2.0};
}

VNResult von_neumann(const VNQuery& q) {
  if (!(q.r > 0.0) || !(q.dr > 0.0) || !(q.dt > 0.0) || !(q.f0 > 0.0))
    raise(ErrorCode::invalid_argument, "von_neumann: r, dr, dt, f0 must be positive");
  const double theta = q.kappa * q.dr;
  if (!(std::abs(theta) < std::numbers::pi)) raise(ErrorCode::invalid_argument, "von_neumann: need |kappa dr| < pi");
  if (q.model == ModelKind::CP1Q2) raise(ErrorCode::invalid_argument, "von_neumann: YM41 and CP1Q1 only");

  const int n = q.model == ModelKind::YM41 ? 5 : 3;
  const double qq = q.r / q.dr;
  const cplx I(0.0, 1.0);
  const cplx ep = std::exp(I * theta), em = std::exp(-I * theta);
  const double sinc = theta == 0.0 ? 1.0 : std::sin(theta) / theta;
  const double wp = std::pow(qq + 0.5, n), wm = std::pow(qq - 0.5, n), wn = std::pow(qq, n);
  cplx J = (wp * (ep - 1.0) - wm * (1.0 - em)) / (wn * q.dr * q.dr);
  if (q.model == ModelKind::YM41)
    J -= 8.0 * I * q.kappa * q.r / (q.f0 + q.r * q.r) * sinc;
  else
    J -= 4.0 * I * q.kappa * q.r * q.r / (q.r * q.r + q.f0 * q.f0) * sinc;

  // x^2 - B x + 1 = 0. Take the larger root from the formula and the other
  // from the product so that x+ x- = 1 to rounding.
  const cplx B = 2.0 + J * q.dt * q.dt;
  const cplx disc = std::sqrt(B * B - 4.0);
  const cplx r1 = (B + disc) / 2.0, r2 = (B - disc) / 2.0;
  const cplx big = std::abs(r1) >= std::abs(r2) ? r1 : r2;
  VNResult out;
  out.J = J;
  out.x_plus = big;
  out.x_minus = 1.0 / big;
  out.omega_plus = -I * std::log(out.x_plus) / q.dt;
  out.omega_minus = -I * std::log(out.x_minus) / q.dt;
  out.growth_plus = std::abs(out.x_plus);
  out.growth_minus = std::abs(out.x_minus);
  return out;
}

SpectrumReport negative_spectrum_check(std::span<const StabilityContext> contexts) {
  SpectrumReport rep;
  for (const StabilityContext& c : contexts) {
    const Spectrum s = eigenvalues(build_linearized_matrix(c));
    ++rep.contexts;
    const double top = s.eigenvalues.back().real();
    rep.max_real = std::max(rep.max_real, top);
    if (!(top < 0.0)) rep.violations.push_back(c);
  }
  return rep;
}

}  // namespace collapse
