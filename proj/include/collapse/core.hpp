#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace collapse {

enum class ErrorCode {
  invalid_argument = 1,
  degenerate_denominator,
  degenerate_fit,
  non_finite,
  no_convergence,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& what);

struct RadialGrid {
  double dr = 0.0;
  std::size_t node_count = 0;
  double r_max = 0.0;

  std::size_t last() const { return node_count - 1; }
  // Always q*dr, never accumulated.
  double radius(std::size_t q) const { return static_cast<double>(q) * dr; }
};

RadialGrid make_grid(double dr, double r_max);

enum class ModelKind { YM41, CP1Q1, CP1Q2 };

const char* model_name(ModelKind m);
ModelKind parse_model(const std::string& name);

struct InitialProfile {
  enum class Kind { Flat, Parabolic };
  Kind kind = Kind::Flat;
  double f0 = 1.0;
  double p = 0.0;

  double at(double r) const { return kind == Kind::Flat ? f0 : p * r * r + f0; }
};

enum class OuterBcKind { Flat, ParabolicSlope };

struct SimConfig {
  ModelKind model = ModelKind::YM41;
  RadialGrid grid;
  double dt = 0.0;
  double v0 = 0.0;
  InitialProfile profile;
  double t_end = 0.0;
  OuterBcKind outer_bc = OuterBcKind::Flat;
  int corrector_iterations = 6;
  double stop_fraction = 1e-3;
  std::vector<double> snapshot_times;
};

// Throws Error(invalid_argument) on a violated invariant. Returns warnings
// that do not block a run (currently only the dt stability constraint).
std::vector<std::string> validate(const SimConfig& cfg);

struct FieldState {
  double t = 0.0;
  std::size_t step = 0;
  std::vector<double> f_curr;
  std::vector<double> f_prev;
};

FieldState init_state(const SimConfig& cfg);

struct TracePoint {
  double t;
  double f;
};

struct Snapshot {
  double t;
  std::vector<double> f;
};

enum class StopReason { ReachedTEnd, OriginBelowThreshold, NonFinite };

const char* stop_reason_name(StopReason s);

struct SimulationResult {
  std::vector<TracePoint> origin_trace;
  std::vector<Snapshot> snapshots;
  StopReason stop_reason = StopReason::ReachedTEnd;
  std::string detail;
  RadialGrid grid;
};

// Step whose time n*dt is nearest to t; ties go to the earlier step.
std::size_t nearest_step(double t, double dt);

}  // namespace collapse
