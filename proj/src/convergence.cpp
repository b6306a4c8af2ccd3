#include "collapse/convergence.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

#include "collapse/integrator.hpp"

namespace collapse {

namespace {

struct Sample {
  bool ok = false;
  std::vector<double> values;
  std::string note;
};

std::string config_key(const SimConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << model_name(c.model) << '|' << c.grid.dr << '|' << c.grid.node_count << '|' << c.dt << '|' << c.v0 << '|'
     << static_cast<int>(c.profile.kind) << '|' << c.profile.f0 << '|' << c.profile.p << '|' << c.t_end << '|'
     << static_cast<int>(c.outer_bc) << '|' << c.corrector_iterations << '|' << c.stop_fraction;
  return os.str();
}

Sample sample_run(const SimConfig& cfg, std::span<const Probe> probes) {
  Sample s;
  try {
    const SimulationResult res = run(cfg);
    if (res.snapshots.empty()) {
      s.note = std::string("run stopped early: ") + stop_reason_name(res.stop_reason) +
               (res.detail.empty() ? "" : " (" + res.detail + ")");
      return s;
    }
    for (const Probe& p : probes) s.values.push_back(res.snapshots.front().f.at(probe_node(p, cfg.grid)));
    s.ok = true;
  } catch (const Error& e) {
    s.note = e.what();
  }
  return s;
}

// Runs every distinct configuration once; identical configs share a result.
std::vector<Sample> run_all(const std::vector<SimConfig>& cfgs, std::span<const Probe> probes, unsigned threads) {
  std::map<std::string, std::size_t> unique_index;
  std::vector<std::size_t> slot(cfgs.size());
  std::vector<const SimConfig*> unique;
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    const auto [it, fresh] = unique_index.emplace(config_key(cfgs[i]), unique.size());
    if (fresh) unique.push_back(&cfgs[i]);
    slot[i] = it->second;
  }
  std::vector<Sample> results(unique.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < unique.size(); i = next++) results[i] = sample_run(*unique[i], probes);
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(unique.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::vector<Sample> out;
  for (std::size_t i = 0; i < cfgs.size(); ++i) out.push_back(results[slot[i]]);
  return out;
}

SimConfig at_time(SimConfig c, double t_probe, int step_shift) {
  const double t = c.dt * (static_cast<double>(nearest_step(t_probe, c.dt)) + step_shift);
  if (t < 0.0) raise(ErrorCode::invalid_argument, "convergence: probe time before t=0");
  c.t_end = t;
  c.snapshot_times = {t};
  return c;
}

ConvergenceTable assemble(std::span<const Probe> probes, double reference, std::span<const double> steps,
                          const std::vector<Sample>& samples) {
  ConvergenceTable table;
  table.probes.assign(probes.begin(), probes.end());
  table.reference_step = reference;
  const Sample& ref = samples.front();
  if (!ref.ok) raise(ErrorCode::non_finite, "convergence: reference run failed: " + ref.note);
  table.reference_values = ref.values;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const Sample& s = samples[i + 1];
    ConvergenceRow row;
    row.step = steps[i];
    row.h = steps[i] - reference;
    row.ok = s.ok;
    row.note = s.note;
    row.values = s.values;
    for (std::size_t p = 0; p < probes.size(); ++p) {
      row.errors.push_back(s.ok ? std::abs(s.values[p] - ref.values[p]) : std::nan(""));
      std::optional<double> q;
      if (!table.rows.empty() && s.ok && table.rows.back().ok)
        q = log_quotient(table.rows.back().errors[p], row.errors[p], table.rows.back().h, row.h);
      row.quotients.push_back(q);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void check_probes(std::span<const Probe> probes) {
  if (probes.empty()) raise(ErrorCode::invalid_argument, "convergence: need at least one probe");
}

}  // namespace

std::optional<double> log_quotient(double Ea, double Eb, double ha, double hb) {
  if (!(Ea > 0.0) || !(Eb > 0.0) || !(ha > 0.0) || !(hb > 0.0) || ha == hb) return std::nullopt;
  return std::log(Ea / Eb) / std::log(ha / hb);
}

std::size_t probe_node(const Probe& p, const RadialGrid& grid) {
  const double x = p.r / grid.dr;
  const double q = std::round(x);
  if (std::abs(x - q) > 1e-9 * std::max(1.0, x))
    raise(ErrorCode::invalid_argument, "probe r=" + std::to_string(p.r) + " is not a multiple of dr");
  const long long node = static_cast<long long>(q) + p.node_shift;
  if (node < 0 || node >= static_cast<long long>(grid.node_count))
    raise(ErrorCode::invalid_argument, "probe r=" + std::to_string(p.r) + " falls outside the grid");
  return static_cast<std::size_t>(node);
}

ConvergenceTable refine_time(const SimConfig& base, std::span<const double> dt_values, double reference_dt,
                             std::span<const Probe> probes, double t_probe, const RefineOptions& opt) {
  check_probes(probes);
  std::vector<SimConfig> cfgs;
  auto with_dt = [&](double dt) {
    SimConfig c = base;
    c.dt = dt;
    return at_time(c, t_probe, opt.step_shift);
  };
  cfgs.push_back(with_dt(reference_dt));
  for (double dt : dt_values) {
    if (!(dt >= reference_dt)) raise(ErrorCode::invalid_argument, "refine_time: every dt must be >= reference dt");
    cfgs.push_back(with_dt(dt));
  }
  for (const SimConfig& c : cfgs) {
    validate(c);
    for (const Probe& p : probes) probe_node(p, c.grid);
  }
  return assemble(probes, reference_dt, dt_values, run_all(cfgs, probes, opt.threads));
}

ConvergenceTable refine_space(const SimConfig& base, std::span<const double> dr_values, double reference_dr,
                              std::span<const Probe> probes, double t_probe, const RefineOptions& opt) {
  check_probes(probes);
  std::vector<SimConfig> cfgs;
  auto with_dr = [&](double dr) {
    SimConfig c = base;
    c.grid = make_grid(dr, base.grid.r_max);
    return at_time(c, t_probe, opt.step_shift);
  };
  cfgs.push_back(with_dr(reference_dr));
  for (double dr : dr_values) {
    if (!(dr >= reference_dr)) raise(ErrorCode::invalid_argument, "refine_space: every dr must be >= reference dr");
    cfgs.push_back(with_dr(dr));
  }
  for (const SimConfig& c : cfgs) {
    validate(c);
    for (const Probe& p : probes) probe_node(p, c.grid);
  }
  return assemble(probes, reference_dr, dr_values, run_all(cfgs, probes, opt.threads));
}

}  // namespace collapse
