#include "collapse/core.hpp"

#include <cmath>
#include <sstream>

namespace collapse {

void raise(ErrorCode code, const std::string& what) { throw Error(code, what); }

RadialGrid make_grid(double dr, double r_max) {
  if (!std::isfinite(dr) || !std::isfinite(r_max) || dr <= 0.0 || r_max <= 0.0)
    raise(ErrorCode::invalid_argument, "grid: dr and r_max must be finite and positive");
  const double cells = std::round(r_max / dr);
  if (cells < 3.0)
    raise(ErrorCode::invalid_argument, "grid: need at least 4 nodes (r_max >= 4*dr)");
  RadialGrid g;
  g.dr = dr;
  g.node_count = static_cast<std::size_t>(cells) + 1;
  g.r_max = cells * dr;
  return g;
}

const char* model_name(ModelKind m) {
  switch (m) {
    case ModelKind::YM41: return "YM41";
    case ModelKind::CP1Q1: return "CP1Q1";
    case ModelKind::CP1Q2: return "CP1Q2";
  }
  return "?";
}

ModelKind parse_model(const std::string& name) {
  if (name == "YM41") return ModelKind::YM41;
  if (name == "CP1Q1") return ModelKind::CP1Q1;
  if (name == "CP1Q2") return ModelKind::CP1Q2;
  raise(ErrorCode::invalid_argument, "unknown model '" + name + "'");
}

const char* stop_reason_name(StopReason s) {
  switch (s) {
    case StopReason::ReachedTEnd: return "ReachedTEnd";
    case StopReason::OriginBelowThreshold: return "OriginBelowThreshold";
    case StopReason::NonFinite: return "NonFinite";
  }
  return "?";
}

std::vector<std::string> validate(const SimConfig& cfg) {
  auto bad = [](const std::string& msg) { raise(ErrorCode::invalid_argument, "config: " + msg); };
  const RadialGrid& g = cfg.grid;
  if (!(g.dr > 0.0) || g.node_count < 4) bad("grid needs dr > 0 and at least 4 nodes");
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) bad("dt must be positive");
  if (!std::isfinite(cfg.v0)) bad("v0 must be finite");
  if (!(cfg.profile.f0 > 0.0) || !std::isfinite(cfg.profile.f0)) bad("f0 must be positive");
  if (!std::isfinite(cfg.profile.p)) bad("profile p must be finite");
  if (!(cfg.t_end >= 0.0) || !std::isfinite(cfg.t_end)) bad("t_end must be non-negative");
  if (cfg.corrector_iterations < 1) bad("corrector_iterations must be >= 1");
  if (!(cfg.stop_fraction > 0.0 && cfg.stop_fraction < 1.0)) bad("stop_fraction must lie in (0,1)");
  for (double ts : cfg.snapshot_times)
    if (!std::isfinite(ts) || ts < 0.0) bad("snapshot times must be non-negative");

  std::vector<std::string> warnings;
  const double limit = std::pow(g.dr, 1.5) / 150.0;
  if (cfg.dt > limit) {
    std::ostringstream os;
    os << "dt=" << cfg.dt << " exceeds dr^1.5/150=" << limit;
    warnings.push_back(os.str());
  }
  return warnings;
}

FieldState init_state(const SimConfig& cfg) {
  validate(cfg);
  FieldState s;
  s.f_curr.resize(cfg.grid.node_count);
  for (std::size_t q = 0; q < cfg.grid.node_count; ++q) s.f_curr[q] = cfg.profile.at(cfg.grid.radius(q));
  s.f_prev = s.f_curr;
  return s;
}

std::size_t nearest_step(double t, double dt) {
  const double x = t / dt;
  const double lo = std::floor(x);
  return static_cast<std::size_t>(x - lo > 0.5 ? lo + 1.0 : lo);
}

}  // namespace collapse
