#include "collapse/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace collapse {

void apply_origin_bc(std::span<double> f) {
  if (f.size() < 3) raise(ErrorCode::invalid_argument, "origin bc needs 3 samples");
  f[0] = 4.0 / 3.0 * f[1] - 1.0 / 3.0 * f[2];
}

void apply_outer_bc(std::span<double> f, OuterBcKind kind, const RadialGrid& grid) {
  if (f.size() < 3) raise(ErrorCode::invalid_argument, "outer bc needs 3 samples");
  const std::size_t Q = f.size() - 1;
  switch (kind) {
    case OuterBcKind::Flat:
      f[Q] = f[Q - 1];
      break;
    case OuterBcKind::ParabolicSlope: {
      const double R = grid.radius(Q);
      f[Q] = f[Q - 1] + (f[Q - 1] - f[Q - 2]) * R / (R - grid.dr);
      break;
    }
  }
}

bool all_finite(std::span<const double> f) {
  return std::all_of(f.begin(), f.end(), [](double v) { return std::isfinite(v); });
}

Integrator::Integrator(const SimConfig& cfg) : cfg_(cfg), rhs_(cfg.model, cfg.grid) { validate(cfg_); }

StepDiagnostics Integrator::advance(FieldState& s) {
  const std::size_t n = cfg_.grid.node_count;
  const std::size_t Q = n - 1;
  const double dt = cfg_.dt;
  const double dt2 = dt * dt;
  const bool first = s.step == 0;

  // On the first step the backward level is the ghost f - v0*dt, so that the
  // centered fdot of the uncorrected predictor is exactly v0.
  prev_.resize(n);
  for (std::size_t q = 0; q < n; ++q) prev_[q] = first ? s.f_curr[q] - cfg_.v0 * dt : s.f_prev[q];

  next_.resize(n);
  work_.resize(n);
  for (std::size_t q = 0; q < n; ++q)
    next_[q] = first ? s.f_curr[q] + cfg_.v0 * dt : 2.0 * s.f_curr[q] - s.f_prev[q];

  const std::span<const double> fc(s.f_curr);
  StepDiagnostics diag;
  for (int it = 0; it < cfg_.corrector_iterations; ++it) {
    for (std::size_t q = 1; q < Q; ++q) {
      const double fdot = (next_[q] - prev_[q]) / (2.0 * dt);
      work_[q] = 2.0 * fc[q] - prev_[q] + dt2 * rhs_(fc, q, fdot);
    }
    apply_origin_bc(work_);
    apply_outer_bc(work_, cfg_.outer_bc, cfg_.grid);
    double change = 0.0;
    for (std::size_t q = 0; q < n; ++q) change = std::max(change, std::abs(work_[q] - next_[q]));
    diag.last_correction = change;
    std::swap(work_, next_);
  }

  std::swap(s.f_prev, s.f_curr);
  s.f_curr.assign(next_.begin(), next_.end());
  ++s.step;
  s.t = static_cast<double>(s.step) * dt;
  return diag;
}

FieldState step(const FieldState& state, const SimConfig& cfg) {
  Integrator integ(cfg);
  FieldState out = state;
  integ.advance(out);
  return out;
}

SimulationResult run(const SimConfig& cfg) {
  Integrator integ(cfg);
  FieldState s = init_state(cfg);
  SimulationResult res;
  res.grid = cfg.grid;

  const std::size_t last_step = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));
  std::multimap<std::size_t, double> wanted;
  for (double ts : cfg.snapshot_times) wanted.emplace(nearest_step(ts, cfg.dt), ts);
  auto capture = [&](std::size_t n) {
    auto range = wanted.equal_range(n);
    for (auto it = range.first; it != range.second; ++it) res.snapshots.push_back({s.t, s.f_curr});
  };

  const double f0 = cfg.profile.f0;
  const double threshold = cfg.stop_fraction * f0;
  res.origin_trace.reserve(std::min<std::size_t>(last_step + 1, std::size_t{1} << 20));
  res.origin_trace.push_back({0.0, s.f_curr[0]});
  capture(0);
  res.stop_reason = StopReason::ReachedTEnd;

  while (s.step < last_step) {
    try {
      integ.advance(s);
    } catch (const Error& e) {
      res.stop_reason = StopReason::NonFinite;
      res.detail = e.what();
      break;
    }
    if (!all_finite(s.f_curr)) {
      res.stop_reason = StopReason::NonFinite;
      res.detail = "non-finite sample at t=" + std::to_string(s.t);
      break;
    }
    res.origin_trace.push_back({s.t, s.f_curr[0]});
    capture(s.step);
    if (s.f_curr[0] <= threshold) {
      res.stop_reason = StopReason::OriginBelowThreshold;
      break;
    }
  }
  return res;
}

}  // namespace collapse
