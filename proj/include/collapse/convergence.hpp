#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "collapse/core.hpp"

namespace collapse {

struct Probe {
  double r = 0.0;
  std::string label;
  // Read node round(r/dr) + node_shift. The legacy tables sample their
  // "r = 10" column one node inside, i.e. node_shift = -1.
  int node_shift = 0;
};

struct RefineOptions {
  // Read the field step_shift steps away from t_probe (legacy CP1Q1 tables
  // sample 5 steps early).
  int step_shift = 0;
  unsigned threads = 1;
};

struct ConvergenceRow {
  double step = 0.0;  // the varied dt or dr
  double h = 0.0;     // step - reference step
  std::vector<double> values;
  std::vector<double> errors;
  std::vector<std::optional<double>> quotients;  // absent on the first row
  bool ok = true;
  std::string note;
};

struct ConvergenceTable {
  std::vector<Probe> probes;
  double reference_step = 0.0;
  std::vector<double> reference_values;
  std::vector<ConvergenceRow> rows;
};

// ln(Ea/Eb) / ln(ha/hb); empty when undefined (zero error or equal h).
std::optional<double> log_quotient(double Ea, double Eb, double ha, double hb);

ConvergenceTable refine_time(const SimConfig& base, std::span<const double> dt_values, double reference_dt,
                             std::span<const Probe> probes, double t_probe, const RefineOptions& opt = {});

ConvergenceTable refine_space(const SimConfig& base, std::span<const double> dr_values, double reference_dr,
                              std::span<const Probe> probes, double t_probe, const RefineOptions& opt = {});

// Node index used for a probe on a grid; throws when r is not a multiple of dr.
std::size_t probe_node(const Probe& p, const RadialGrid& grid);

}  // namespace collapse
