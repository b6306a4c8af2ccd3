#pragma once

#include <span>

#include "collapse/core.hpp"
#include "collapse/models.hpp"

namespace collapse {

// f(0) from the even quadratic through f(dr) and f(2dr).
void apply_origin_bc(std::span<double> samples);

void apply_outer_bc(std::span<double> samples, OuterBcKind kind, const RadialGrid& grid);

struct StepDiagnostics {
  // Max-norm change of f+ made by the last corrector pass.
  double last_correction = 0.0;
};

class Integrator {
 public:
  explicit Integrator(const SimConfig& cfg);

  // Advances in place. Throws Error(degenerate_denominator) from the model;
  // non-finite samples are left in place and reported by all_finite().
  StepDiagnostics advance(FieldState& state);

  const SimConfig& config() const { return cfg_; }

 private:
  SimConfig cfg_;
  RhsTable rhs_;
  std::vector<double> next_, work_, prev_;
};

FieldState step(const FieldState& state, const SimConfig& cfg);

bool all_finite(std::span<const double> samples);

SimulationResult run(const SimConfig& cfg);

}  // namespace collapse
