// collapse: command-line frontend over the C API.
//
//   collapse simulate  --config run.json  --out DIR
//   collapse fit       --config fit.json  --out DIR
//   collapse predict   --config pred.json --out DIR
//   collapse stability --config stab.json --out DIR
//   collapse converge  --config conv.json --out DIR --threads N
//
// Exit codes: 0 success, 1 usage or config error, 2 runtime failure.

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "collapse/collapse.h"
#include "csv.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using cli::num;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(clp_status s, const std::string& what) {
  if (s == CLP_OK) return;
  const std::string msg = what + ": " + clp_last_error();
  if (s == CLP_E_INVALID_ARGUMENT) throw ConfigError(msg);
  throw RunError(msg);
}

using ConfigPtr = std::unique_ptr<clp_config, decltype(&clp_config_destroy)>;
using ResultPtr = std::unique_ptr<clp_result, decltype(&clp_result_destroy)>;
using EvolutionPtr = std::unique_ptr<clp_slice_evolution, decltype(&clp_slice_evolution_destroy)>;
using TablePtr = std::unique_ptr<clp_table, decltype(&clp_table_destroy)>;

struct Options {
  fs::path config;
  fs::path out = "out";
  bool force = false;
  bool svg = false;
  unsigned threads = 1;
};

// Hands out output paths, refusing to clobber existing files without --force.
class Output {
 public:
  explicit Output(const Options& o) : dir_(o.out), force_(o.force) {}

  void require_free(const std::vector<fs::path>& names) const {
    for (const fs::path& n : names) free_or_throw(dir_ / n);
  }

  fs::path claim(const fs::path& name) const {
    const fs::path p = dir_ / name;
    free_or_throw(p);
    fs::create_directories(p.parent_path());
    return p;
  }

 private:
  void free_or_throw(const fs::path& p) const {
    if (force_ || !fs::exists(p)) return;
    if (fs::is_directory(p) && fs::is_empty(p)) return;
    throw ConfigError(p.string() + " already exists (use --force to overwrite)");
  }

  fs::path dir_;
  bool force_;
};

// ---- JSON access ----

json load_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot read config " + p.string());
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(p.string() + ": " + e.what());
  }
}

void allow_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* a) { return k == a; }) == keys.end())
      throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

double num_at(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  if (!j[key].is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
  return j[key].get<double>();
}

double num_or(const json& j, const char* key, double def, const std::string& where) {
  return j.contains(key) ? num_at(j, key, where) : def;
}

std::string str_at(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  if (!j[key].is_string()) throw ConfigError(where + ": '" + key + "' must be a string");
  return j[key].get<std::string>();
}

std::string str_or(const json& j, const char* key, const std::string& def, const std::string& where) {
  return j.contains(key) ? str_at(j, key, where) : def;
}

long long int_or(const json& j, const char* key, long long def, const std::string& where) {
  if (!j.contains(key)) return def;
  if (!j[key].is_number_integer()) throw ConfigError(where + ": '" + key + "' must be an integer");
  return j[key].get<long long>();
}

// A list of numbers, or {start, stop, step} expanded inclusively.
std::vector<double> number_list(const json& v, const std::string& where) {
  std::vector<double> out;
  if (v.is_array()) {
    for (const json& e : v) {
      if (!e.is_number()) throw ConfigError(where + ": expected numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  allow_keys(v, {"start", "stop", "step"}, where);
  const double a = num_at(v, "start", where), b = num_at(v, "stop", where), s = num_at(v, "step", where);
  if (!(s > 0.0) || !(b >= a)) throw ConfigError(where + ": need step > 0 and stop >= start");
  const auto n = static_cast<long long>(std::floor((b - a) / s + 1e-9));
  if (n > 10'000'000) throw ConfigError(where + ": range too long");
  for (long long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * s);
  return out;
}

clp_model model_at(const json& j, const std::string& where) {
  clp_model m;
  if (clp_parse_model(str_at(j, "model", where).c_str(), &m) != CLP_OK) throw ConfigError(where + ": " + clp_last_error());
  return m;
}

// ---- simulation config ----

ConfigPtr sim_config(const json& j, const std::string& where = "config") {
  allow_keys(j,
             {"model", "grid", "dt", "v0", "profile", "t_end", "outer_bc", "corrector_iterations", "stop_fraction",
              "snapshot_times"},
             where);
  clp_config* raw = nullptr;
  check(clp_config_create(&raw), "config");
  ConfigPtr c(raw, clp_config_destroy);

  check(clp_config_set_model(c.get(), model_at(j, where)), where);
  if (!j.contains("grid")) throw ConfigError(where + ": missing 'grid'");
  const json& g = j["grid"];
  allow_keys(g, {"dr", "r_max"}, where + ".grid");
  check(clp_config_set_grid(c.get(), num_at(g, "dr", where + ".grid"), num_or(g, "r_max", 100.0, where + ".grid")),
        where + ".grid");
  check(clp_config_set_time(c.get(), num_at(j, "dt", where), num_at(j, "t_end", where)), where);

  clp_profile_kind kind = CLP_PROFILE_FLAT;
  double f0 = 1.0, p = 0.0;
  if (j.contains("profile")) {
    const json& pr = j["profile"];
    allow_keys(pr, {"kind", "f0", "p"}, where + ".profile");
    const std::string k = str_or(pr, "kind", "flat", where + ".profile");
    if (k == "parabolic")
      kind = CLP_PROFILE_PARABOLIC;
    else if (k != "flat")
      throw ConfigError(where + ".profile: kind must be 'flat' or 'parabolic'");
    f0 = num_or(pr, "f0", 1.0, where + ".profile");
    p = num_or(pr, "p", 0.0, where + ".profile");
  }
  check(clp_config_set_initial(c.get(), kind, f0, p, num_at(j, "v0", where)), where);

  const std::string bc = str_or(j, "outer_bc", "flat", where);
  if (bc != "flat" && bc != "parabolic_slope") throw ConfigError(where + ": outer_bc must be 'flat' or 'parabolic_slope'");
  check(clp_config_set_outer_bc(c.get(), bc == "flat" ? CLP_BC_FLAT : CLP_BC_PARABOLIC_SLOPE), where);
  check(clp_config_set_corrector_iterations(c.get(), static_cast<int>(int_or(j, "corrector_iterations", 6, where))),
        where);
  check(clp_config_set_stop_fraction(c.get(), num_or(j, "stop_fraction", 1e-3, where)), where);
  if (j.contains("snapshot_times")) {
    const auto ts = number_list(j["snapshot_times"], where + ".snapshot_times");
    check(clp_config_set_snapshot_times(c.get(), ts.data(), ts.size()), where);
  }

  std::size_t warnings = 0;
  check(clp_config_validate(c.get(), &warnings), where);
  for (std::size_t i = 0; i < warnings; ++i) std::cerr << "warning: " << clp_config_warning(c.get(), i) << "\n";
  return c;
}

// ---- simulate ----

std::string snapshot_name(double t) { return "snapshot_" + num(t) + ".csv"; }

int cmd_simulate(const Options& o) {
  const json j = load_json(o.config);
  ConfigPtr cfg = sim_config(j);
  Output out(o);
  out.require_free({"origin.csv", "snapshots"});

  clp_result* raw = nullptr;
  check(clp_simulate(cfg.get(), &raw), "simulate");
  ResultPtr res(raw, clp_result_destroy);

  const std::size_t n = clp_result_trace_length(res.get());
  std::vector<double> t(n), f(n);
  check(clp_result_trace(res.get(), t.data(), f.data(), n), "trace");
  {
    cli::CsvWriter w(out.claim("origin.csv"), {"t", "f0_t"});
    for (std::size_t i = 0; i < n; ++i) w.row({num(t[i]), num(f[i])});
  }

  const double dr = clp_config_dr(cfg.get());
  std::vector<cli::Series> slices;
  for (std::size_t s = 0; s < clp_result_snapshot_count(res.get()); ++s) {
    double ts = 0.0;
    const double* samples = nullptr;
    std::size_t m = 0;
    check(clp_result_snapshot(res.get(), s, &ts, &samples, &m), "snapshot");
    cli::CsvWriter w(out.claim(fs::path("snapshots") / snapshot_name(ts)), {"r", "f"});
    cli::Series ser{"t=" + num(ts), {}, {}};
    for (std::size_t q = 0; q < m; ++q) {
      const double r = static_cast<double>(q) * dr;
      w.row({num(r), num(samples[q])});
      ser.x.push_back(r);
      ser.y.push_back(samples[q]);
    }
    slices.push_back(std::move(ser));
  }

  if (o.svg) {
    cli::write_svg(out.claim("origin.svg"), "origin trace", "t", "f(0,t)", {{"f(0,t)", t, f}});
    if (!slices.empty()) cli::write_svg(out.claim("snapshots.svg"), "time slices", "r", "f(r,t)", slices);
  }

  std::cout << "stop: " << clp_result_stop_name(res.get()) << ", steps " << (n ? n - 1 : 0) << ", t " << num(n ? t.back() : 0.0)
            << ", f(0,t) " << num(n ? f.back() : 0.0) << "\n";
  if (clp_result_stop_reason(res.get()) == CLP_STOP_NON_FINITE) {
    std::cerr << "error: run stopped on a non-finite field: " << clp_result_detail(res.get()) << "\n";
    return 2;
  }
  return 0;
}

// ---- fit ----

struct Trace {
  std::vector<double> t, f;
};

Trace read_origin(const fs::path& dir) {
  try {
    const auto csv = cli::read_numeric_csv(dir / "origin.csv");
    const std::size_t ct = csv.column("t"), cf = csv.column("f0_t");
    Trace tr;
    for (const auto& r : csv.rows) {
      tr.t.push_back(r[ct]);
      tr.f.push_back(r[cf]);
    }
    return tr;
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
}

struct Slices {
  std::vector<double> t;
  std::vector<std::vector<double>> f;
  double dr = 0.0;
  std::size_t nodes = 0;
};

Slices read_snapshots(const fs::path& dir) {
  const fs::path sd = dir / "snapshots";
  if (!fs::is_directory(sd)) throw ConfigError("no snapshots directory in " + dir.string());
  std::vector<std::pair<double, fs::path>> files;
  for (const auto& e : fs::directory_iterator(sd)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("snapshot_", 0) != 0 || e.path().extension() != ".csv") continue;
    const std::string stem = e.path().stem().string().substr(9);
    char* end = nullptr;
    const double t = std::strtod(stem.c_str(), &end);
    if (*end != '\0') throw ConfigError("cannot read time from " + name);
    files.emplace_back(t, e.path());
  }
  std::sort(files.begin(), files.end());
  Slices s;
  for (const auto& [t, p] : files) {
    cli::NumericCsv csv;
    try {
      csv = cli::read_numeric_csv(p);
    } catch (const std::runtime_error& e) {
      throw ConfigError(e.what());
    }
    const std::size_t cr = csv.column("r"), cf = csv.column("f");
    if (csv.rows.size() < 4 || csv.rows[0][cr] != 0.0) throw ConfigError(p.string() + ": expected r from 0");
    const double dr = csv.rows[1][cr];
    if (s.nodes == 0) {
      s.nodes = csv.rows.size();
      s.dr = dr;
    } else if (csv.rows.size() != s.nodes || dr != s.dr) {
      throw ConfigError(p.string() + ": grid differs from the other snapshots");
    }
    std::vector<double> f;
    for (const auto& r : csv.rows) f.push_back(r[cf]);
    s.t.push_back(t);
    s.f.push_back(std::move(f));
  }
  if (s.t.empty()) throw ConfigError("no snapshot files in " + sd.string());
  return s;
}

std::pair<std::optional<clp_window>, std::string> window_at(const json& j) {
  if (!j.contains("window")) return {std::nullopt, "full trace"};
  const json& w = j["window"];
  const std::string kind = str_at(w, "kind", "window");
  if (kind == "after_fraction") {
    allow_keys(w, {"kind", "phi"}, "window");
    const double phi = num_at(w, "phi", "window");
    return {clp_window{CLP_WINDOW_AFTER_FRACTION, phi, 0.0}, "after_fraction phi=" + num(phi)};
  }
  if (kind == "time_range") {
    allow_keys(w, {"kind", "t1", "t2"}, "window");
    const double a = num_at(w, "t1", "window"), b = num_at(w, "t2", "window");
    return {clp_window{CLP_WINDOW_TIME_RANGE, a, b}, "time_range t1=" + num(a) + " t2=" + num(b)};
  }
  if (kind == "before_boundary_hit") {
    allow_keys(w, {"kind", "a_max"}, "window");
    const double a = num_at(w, "a_max", "window");
    return {clp_window{CLP_WINDOW_BEFORE_BOUNDARY_HIT, a, 0.0}, "before_boundary_hit a_max=" + num(a)};
  }
  throw ConfigError("window: unknown kind '" + kind + "'");
}

Trace apply_window(const Trace& tr, const std::optional<clp_window>& w) {
  if (!w) return tr;
  Trace out{std::vector<double>(tr.t.size()), std::vector<double>(tr.t.size())};
  std::size_t n = 0;
  check(clp_select_fit_window(tr.t.data(), tr.f.data(), tr.t.size(), &*w, out.t.data(), out.f.data(), &n), "window");
  out.t.resize(n);
  out.f.resize(n);
  return out;
}

int cmd_fit(const Options& o) {
  const json j = load_json(o.config);
  allow_keys(j, {"input", "fitter", "window", "slices", "cr_window"}, "config");
  const fs::path input = str_at(j, "input", "config");
  const std::string fitter = str_at(j, "fitter", "config");
  Output out(o);
  out.require_free({"fit.csv"});

  std::vector<std::pair<std::string, std::string>> rows{{"fitter", fitter}};
  std::vector<cli::Series> plot;
  std::string xlabel = "t", ylabel = "f(0,t)";

  if (fitter == "parabola_vertex" || fitter == "line") {
    const Trace all = read_origin(input);
    const auto [w, desc] = window_at(j);
    const Trace tr = apply_window(all, w);
    rows.emplace_back("window", desc);
    Trace model;
    if (fitter == "parabola_vertex") {
      clp_parabola_fit p;
      check(clp_fit_parabola_vertex(tr.t.data(), tr.f.data(), tr.t.size(), &p), "fit");
      rows.insert(rows.end(), {{"a", num(p.a)}, {"T", num(p.T)}, {"offset", num(p.offset)}, {"rms", num(p.rms)}});
      for (double t : all.t) model.f.push_back(p.a * (t - p.T) * (t - p.T) + p.offset);
    } else {
      clp_line_fit l;
      check(clp_fit_line(tr.t.data(), tr.f.data(), tr.t.size(), &l), "fit");
      rows.insert(rows.end(), {{"m", num(l.m)}, {"b", num(l.b)}, {"zero_crossing", num(-l.b / l.m)}, {"rms", num(l.rms)}});
      for (double t : all.t) model.f.push_back(l.m * t + l.b);
    }
    rows.emplace_back("points", std::to_string(tr.t.size()));
    plot = {{"simulated", all.t, all.f}, {"fitted " + fitter, all.t, model.f}};
  } else if (fitter == "c_R") {
    const Trace tr = read_origin(input);
    double skip_start = 0.1, skip_end = 0.1;
    if (j.contains("cr_window")) {
      allow_keys(j["cr_window"], {"skip_start", "skip_end"}, "cr_window");
      skip_start = num_or(j["cr_window"], "skip_start", skip_start, "cr_window");
      skip_end = num_or(j["cr_window"], "skip_end", skip_end, "cr_window");
    }
    clp_cr_extraction e;
    check(clp_extract_c_R(tr.t.data(), tr.f.data(), tr.t.size(), skip_start, skip_end, &e), "fit");
    rows.insert(rows.end(), {{"window", "skip_start=" + num(skip_start) + " skip_end=" + num(skip_end)},
                             {"c", num(e.c)},
                             {"R_eff", num(e.R_eff)},
                             {"m", num(e.line.m)},
                             {"b", num(e.line.b)},
                             {"rms", num(e.line.rms)},
                             {"points", std::to_string(e.points)}});
    std::vector<double> model(tr.t.size());
    check(clp_trajectory_q1(tr.f.front(), e.c, e.R_eff, tr.t.data(), tr.t.size(), model.data(), nullptr, nullptr),
          "trajectory");
    plot = {{"simulated", tr.t, tr.f}, {"trajectory from c, R_eff", tr.t, model}};
  } else if (fitter == "ellipse_evolution" || fitter == "hyperbola_evolution") {
    const Slices s = read_snapshots(input);
    clp_slice_options opt;
    clp_slice_options_default(&opt);
    if (j.contains("slices")) {
      const json& so = j["slices"];
      allow_keys(so, {"height_fraction", "t_min", "a_max", "min_points"}, "slices");
      opt.height_fraction = num_or(so, "height_fraction", opt.height_fraction, "slices");
      opt.t_min = num_or(so, "t_min", opt.t_min, "slices");
      opt.a_max = num_or(so, "a_max", opt.a_max, "slices");
      const long long mp = int_or(so, "min_points", static_cast<long long>(opt.min_points), "slices");
      if (mp < 0) throw ConfigError("slices: min_points must be >= 0");
      opt.min_points = static_cast<std::size_t>(mp);
    }
    std::vector<const double*> ptrs;
    for (const auto& f : s.f) ptrs.push_back(f.data());
    const bool ellipse = fitter == "ellipse_evolution";
    clp_slice_evolution* raw = nullptr;
    check(clp_fit_slice_evolution(ellipse ? CLP_CONIC_ELLIPSE : CLP_CONIC_HYPERBOLA, s.t.data(), ptrs.data(),
                                  s.t.size(), s.nodes, s.dr, &opt, &raw),
          "fit");
    EvolutionPtr ev(raw, clp_slice_evolution_destroy);
    rows.emplace_back("window", "height_fraction=" + num(opt.height_fraction) + " t_min=" + num(opt.t_min) +
                                    " a_max=" + num(opt.a_max) + " min_points=" + std::to_string(opt.min_points));
    cli::Series sa{"a", {}, {}, true}, sb{"b", {}, {}, true}, sk{"k", {}, {}, true};
    {
      cli::CsvWriter w(out.claim("slices.csv"), {"t", "a", "b", "k", "rms"});
      for (std::size_t i = 0; i < clp_slice_evolution_count(ev.get()); ++i) {
        double t;
        clp_conic_fit c;
        check(clp_slice_evolution_slice(ev.get(), i, &t, &c), "slice");
        w.row({num(t), num(c.a), num(c.b), num(c.k), num(c.rms)});
        sa.x.push_back(t), sa.y.push_back(c.a);
        sb.x.push_back(t), sb.y.push_back(c.b);
        sk.x.push_back(t), sk.y.push_back(c.k);
      }
    }
    clp_line_fit a_line, k_line;
    double c = 0.0;
    check(clp_slice_evolution_laws(ev.get(), &a_line, &c, &k_line), "laws");
    if (ellipse) {
      rows.insert(rows.end(), {{"m_a", num(a_line.m)},
                               {"b_a", num(a_line.b)},
                               {"rms_a", num(a_line.rms)},
                               {"c", num(c)},
                               {"m_k", num(k_line.m)},
                               {"b_k", num(k_line.b)},
                               {"rms_k", num(k_line.rms)}});
      plot = {sa, sb, sk};
    } else {
      rows.insert(rows.end(), {{"m_slope", num(a_line.m)}, {"b_slope", num(a_line.b)}, {"rms_slope", num(a_line.rms)}});
      cli::Series sl{"-b/a", {}, {}, true};
      for (std::size_t i = 0; i < sa.x.size(); ++i) sl.x.push_back(sa.x[i]), sl.y.push_back(-sb.y[i] / sa.y[i]);
      plot = {sl};
    }
    rows.emplace_back("slices", std::to_string(clp_slice_evolution_count(ev.get())));
    ylabel = "fitted parameter";
  } else {
    throw ConfigError("unknown fitter '" + fitter +
                      "' (parabola_vertex, line, c_R, ellipse_evolution, hyperbola_evolution)");
  }

  {
    cli::CsvWriter w(out.claim("fit.csv"), {"key", "value"});
    for (const auto& [k, v] : rows) w.row({k, v});
  }
  if (o.svg) cli::write_svg(out.claim("fit.svg"), "fit: " + fitter, xlabel, ylabel, plot);
  for (const auto& [k, v] : rows) std::cout << k << " = " << v << "\n";
  return 0;
}

// ---- predict ----

double kv_number(const std::map<std::string, std::string>& kv, const std::string& key, const fs::path& src) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw ConfigError(src.string() + ": no '" + key + "' entry");
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (*end != '\0') throw ConfigError(src.string() + ": '" + key + "' is not a number");
  return v;
}

int cmd_predict(const Options& o) {
  const json j = load_json(o.config);
  allow_keys(j, {"kind", "model", "f0", "v0", "curvature", "c", "R", "from_fit", "times", "radii"}, "config");
  const std::string kind = str_at(j, "kind", "config");
  if (!j.contains("times")) throw ConfigError("config: missing 'times'");
  const std::vector<double> times = number_list(j["times"], "times");
  const double f0 = num_or(j, "f0", 1.0, "config");
  Output out(o);
  out.require_free({"prediction.csv", "params.csv"});

  std::vector<std::pair<std::string, std::string>> params{{"kind", kind}, {"f0", num(f0)}};
  std::vector<double> f(times.size());
  std::vector<int> collapsed(times.size(), 0);

  if (kind == "parabola" || kind == "line_law_q1") {
    const double v0 = num_at(j, "v0", "config");
    double a = 0.0, T = 0.0;
    if (kind == "parabola") {
      const clp_model m = model_at(j, "config");
      check(clp_predict_parabola(m, f0, v0, &a, &T), "predict");
      params.insert(params.end(), {{"model", clp_model_name(m)}, {"v0", num(v0)}, {"a", num(a)}, {"T", num(T)}});
    } else {
      check(clp_empirical_line_law_q1(f0, v0, &T, &a), "predict");
      params.insert(params.end(), {{"v0", num(v0)}, {"m", num(a)}, {"T", num(T)}});
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double d = times[i] - T;
      collapsed[i] = d > 0.0;
      f[i] = collapsed[i] ? 0.0 : (kind == "parabola" ? a * d * d : a * d);
    }
  } else if (kind == "trajectory_q1") {
    double c = 0.0, R = 0.0;
    if (j.contains("from_fit")) {
      const fs::path src = str_at(j, "from_fit", "config");
      std::map<std::string, std::string> kv;
      try {
        kv = cli::read_key_values(src);
      } catch (const std::runtime_error& e) {
        throw ConfigError(e.what());
      }
      c = kv_number(kv, "c", src);
      R = kv_number(kv, "R_eff", src);
    } else {
      c = num_at(j, "c", "config");
      R = num_at(j, "R", "config");
    }
    double tc = 0.0;
    check(clp_trajectory_q1(f0, c, R, times.data(), times.size(), f.data(), collapsed.data(), &tc), "predict");
    params.insert(params.end(), {{"c", num(c)}, {"R_eff", num(R)}, {"collapse_time", num(tc)}});
  } else if (kind == "profile_parabola") {
    const double v0 = num_at(j, "v0", "config");
    const std::string sign = str_or(j, "curvature", "negative", "config");
    if (sign != "negative" && sign != "positive") throw ConfigError("config: curvature must be negative or positive");
    double p, a, T;
    check(clp_profile_parabola(f0, v0, sign == "positive", &p, &a, &T), "predict");
    params.insert(params.end(), {{"v0", num(v0)}, {"curvature", sign}, {"p", num(p)}, {"a", num(a)}, {"T", num(T)}});
    const std::vector<double> radii = j.contains("radii") ? number_list(j["radii"], "radii") : std::vector<double>{0.0};
    std::optional<clp_model> m;
    if (j.contains("model")) m = model_at(j, "config");
    std::vector<std::string> header{"t", "r", "f"};
    if (m) header.push_back("residual");
    {
      cli::CsvWriter w(out.claim("prediction.csv"), header);
      for (double t : times)
        for (double r : radii) {
          std::vector<std::string> row{num(t), num(r), num(p * r * r + a * (t - T) * (t - T))};
          if (m) {
            double res = 0.0;
            check(clp_profile_residual(*m, f0, v0, r, t, &res), "residual");
            row.push_back(num(res));
          }
          w.row(row);
        }
    }
    for (std::size_t i = 0; i < times.size(); ++i) f[i] = a * (times[i] - T) * (times[i] - T);
  } else {
    throw ConfigError("unknown prediction kind '" + kind + "' (parabola, line_law_q1, trajectory_q1, profile_parabola)");
  }

  if (kind != "profile_parabola") {
    cli::CsvWriter w(out.claim("prediction.csv"), {"t", "f", "collapsed"});
    for (std::size_t i = 0; i < times.size(); ++i) w.row({num(times[i]), num(f[i]), collapsed[i] ? "1" : "0"});
  }
  {
    cli::CsvWriter w(out.claim("params.csv"), {"key", "value"});
    for (const auto& [k, v] : params) w.row({k, v});
  }
  if (o.svg) cli::write_svg(out.claim("prediction.svg"), "prediction: " + kind, "t", "f(0,t)", {{kind, times, f}});
  for (const auto& [k, v] : params) std::cout << k << " = " << v << "\n";
  return 0;
}

// ---- stability ----

clp_stability_context context_at(const json& c, const std::string& where) {
  allow_keys(c, {"model", "n", "f0", "fdot0", "dr"}, where);
  const long long n = int_or(c, "n", 5, where);
  if (n < 2) throw ConfigError(where + ": n must be >= 2");
  return {model_at(c, where), static_cast<std::size_t>(n), num_or(c, "f0", 1.0, where), num_or(c, "fdot0", 0.0, where),
          num_or(c, "dr", 0.01, where)};
}

int cmd_stability(const Options& o) {
  const json j = load_json(o.config);
  allow_keys(j, {"contexts", "von_neumann"}, "config");
  Output out(o);
  std::vector<clp_stability_context> ctxs;
  if (j.contains("contexts")) {
    if (!j["contexts"].is_array()) throw ConfigError("contexts: expected an array");
    for (std::size_t i = 0; i < j["contexts"].size(); ++i)
      ctxs.push_back(context_at(j["contexts"][i], "contexts[" + std::to_string(i) + "]"));
  }
  if (ctxs.empty() && !j.contains("von_neumann")) throw ConfigError("config: nothing to do (contexts, von_neumann)");
  if (!ctxs.empty()) out.require_free({"matrix.csv", "spectrum.csv"});
  if (j.contains("von_neumann")) out.require_free({"vn.csv"});

  if (!ctxs.empty()) {
    cli::CsvWriter mw(out.claim("matrix.csv"), {"context", "row", "sub", "diag", "super"});
    cli::CsvWriter sw(out.claim("spectrum.csv"),
                      {"context", "model", "n", "f0", "fdot0", "dr", "index", "alpha_re", "alpha_im", "lambda_plus_re",
                       "lambda_plus_im", "lambda_minus_re", "lambda_minus_im"});
    std::vector<cli::Series> plot;
    for (std::size_t k = 0; k < ctxs.size(); ++k) {
      const clp_stability_context& c = ctxs[k];
      std::vector<double> d(c.n), lo(c.n - 1), up(c.n - 1), re(c.n), im(c.n);
      check(clp_linearized_matrix(&c, d.data(), lo.data(), up.data()), "matrix");
      for (std::size_t i = 0; i < c.n; ++i)
        mw.row({std::to_string(k), std::to_string(i + 1), i ? num(lo[i - 1]) : "", num(d[i]),
                i + 1 < c.n ? num(up[i]) : ""});
      check(clp_eigenvalues(c.n, d.data(), lo.data(), up.data(), re.data(), im.data()), "eigenvalues");
      double lift = 0.0;
      check(clp_lift_constant(&c, &lift), "lift");
      for (std::size_t i = 0; i < c.n; ++i) {
        double l[4];
        clp_lift_eigenvalue(re[i], im[i], lift, l);
        sw.row({std::to_string(k), clp_model_name(c.model), std::to_string(c.n), num(c.f0), num(c.fdot0), num(c.dr),
                std::to_string(i + 1), num(re[i]), num(im[i]), num(l[0]), num(l[1]), num(l[2]), num(l[3])});
      }
      plot.push_back({std::string(clp_model_name(c.model)) + " #" + std::to_string(k), re, im, true});
    }
    double max_real = 0.0;
    std::size_t bad = 0;
    check(clp_negative_spectrum_check(ctxs.data(), ctxs.size(), &max_real, &bad), "spectrum check");
    std::cout << "contexts " << ctxs.size() << ", max Re(alpha) " << num(max_real) << ", non-negative " << bad << "\n";
    if (o.svg) cli::write_svg(out.claim("spectrum.svg"), "eigenvalues", "Re", "Im", plot);
  }

  if (j.contains("von_neumann")) {
    const json& v = j["von_neumann"];
    allow_keys(v, {"model", "r", "f0", "dr", "dt", "kappa"}, "von_neumann");
    clp_vn_query q{model_at(v, "von_neumann"), 0.0, num_or(v, "r", 1.0, "von_neumann"),
                   num_or(v, "f0", 1.0, "von_neumann"), num_at(v, "dr", "von_neumann"), num_at(v, "dt", "von_neumann")};
    if (!v.contains("kappa")) throw ConfigError("von_neumann: missing 'kappa'");
    const auto kappas = number_list(v["kappa"], "von_neumann.kappa");
    cli::CsvWriter w(out.claim("vn.csv"), {"kappa", "J_re", "J_im", "growth_plus", "growth_minus"});
    cli::Series gp{"growth+", {}, {}}, gm{"growth-", {}, {}};
    double worst = 0.0;
    for (double k : kappas) {
      q.kappa = k;
      clp_vn_result r;
      check(clp_von_neumann(&q, &r), "von_neumann");
      w.row({num(k), num(r.J_re), num(r.J_im), num(r.growth_plus), num(r.growth_minus)});
      gp.x.push_back(k), gp.y.push_back(r.growth_plus);
      gm.x.push_back(k), gm.y.push_back(r.growth_minus);
      worst = std::max(worst, r.growth_plus);
    }
    std::cout << "von Neumann: " << kappas.size() << " wavenumbers, max growth " << num(worst) << "\n";
    if (o.svg) cli::write_svg(out.claim("vn.svg"), "growth factors", "kappa", "|x|", {gp, gm});
  }
  return 0;
}

// ---- converge ----

int cmd_converge(const Options& o) {
  const json j = load_json(o.config);
  allow_keys(j, {"base", "refine", "steps", "reference", "probes", "t_probe", "step_shift"}, "config");
  const double t_probe = num_at(j, "t_probe", "config");
  if (!j.contains("base")) throw ConfigError("config: missing 'base'");
  json base = j["base"];
  if (base.is_object() && !base.contains("t_end")) base["t_end"] = t_probe;
  ConfigPtr cfg = sim_config(base, "base");

  const std::string refine = str_at(j, "refine", "config");
  if (refine != "time" && refine != "space") throw ConfigError("config: refine must be 'time' or 'space'");
  if (!j.contains("steps")) throw ConfigError("config: missing 'steps'");
  const auto steps = number_list(j["steps"], "steps");
  const double reference = num_at(j, "reference", "config");
  if (!j.contains("probes") || !j["probes"].is_array()) throw ConfigError("config: 'probes' must be an array");
  std::vector<clp_probe> probes;
  for (const json& p : j["probes"]) {
    allow_keys(p, {"r", "node_shift"}, "probes");
    probes.push_back({num_at(p, "r", "probes"), static_cast<int>(int_or(p, "node_shift", 0, "probes"))});
  }
  const int step_shift = static_cast<int>(int_or(j, "step_shift", 0, "config"));
  Output out(o);
  out.require_free({"table.csv"});

  clp_table* raw = nullptr;
  check(clp_refine(cfg.get(), refine == "time" ? CLP_REFINE_TIME : CLP_REFINE_SPACE, steps.data(), steps.size(),
                   reference, probes.data(), probes.size(), t_probe, step_shift, o.threads, &raw),
        "converge");
  TablePtr table(raw, clp_table_destroy);

  const std::size_t np = clp_table_probe_count(table.get());
  std::vector<std::string> header{"h"};
  for (const auto& p : probes) header.push_back("E" + num(p.r));
  for (const auto& p : probes) header.push_back("q" + num(p.r));
  header.push_back("step");
  for (const auto& p : probes) header.push_back("f_r" + num(p.r));

  int status = 0;
  std::vector<cli::Series> plot(np);
  for (std::size_t p = 0; p < np; ++p) plot[p].label = "E" + num(probes[p].r), plot[p].markers = true;
  {
    cli::CsvWriter w(out.claim("table.csv"), header);
    std::vector<std::string> ref{num(0.0)};
    for (std::size_t p = 0; p < np; ++p) ref.push_back(num(0.0));
    for (std::size_t p = 0; p < np; ++p) ref.push_back("");
    ref.push_back(num(reference));
    for (std::size_t p = 0; p < np; ++p) ref.push_back(num(clp_table_reference_value(table.get(), p)));
    w.row(ref);
    for (std::size_t r = 0; r < clp_table_row_count(table.get()); ++r) {
      double step, h;
      int ok;
      const char* note;
      check(clp_table_row(table.get(), r, &step, &h, &ok, &note), "table");
      if (!ok) {
        std::cerr << "error: run at step " << num(step) << " failed: " << note << "\n";
        status = 2;
      }
      std::vector<double> val(np), err(np), quo(np);
      std::vector<int> hq(np);
      for (std::size_t p = 0; p < np; ++p) check(clp_table_cell(table.get(), r, p, &val[p], &err[p], &quo[p], &hq[p]), "table");
      std::vector<std::string> row{num(h)};
      for (std::size_t p = 0; p < np; ++p) row.push_back(ok ? num(err[p]) : "");
      for (std::size_t p = 0; p < np; ++p) row.push_back(hq[p] ? num(quo[p]) : "");
      row.push_back(num(step));
      for (std::size_t p = 0; p < np; ++p) row.push_back(ok ? num(val[p]) : "");
      w.row(row);
      for (std::size_t p = 0; p < np; ++p)
        if (ok) plot[p].x.push_back(h), plot[p].y.push_back(err[p]);
    }
  }
  if (o.svg) cli::write_svg(out.claim("table.svg"), "refinement errors", "h", "E", plot);
  std::cout << "table.csv: " << clp_table_row_count(table.get()) << " rows against reference " << num(reference)
            << "\n";
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soliton collapse simulations: simulate, fit, predict, stability, converge"};
  app.require_subcommand(1);
  Options opt;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory")->capture_default_str();
    sub->add_flag("--force", opt.force, "overwrite existing output files");
    sub->add_flag("--svg", opt.svg, "also write SVG plots");
    sub->add_option("--threads", opt.threads, "worker threads for independent runs")
        ->check(CLI::Range(1u, 1024u))
        ->capture_default_str();
    return sub;
  };
  int (*handler)(const Options&) = nullptr;
  auto bind = [&](CLI::App* sub, int (*fn)(const Options&)) { sub->callback([&handler, fn] { handler = fn; }); };
  bind(common(app.add_subcommand("simulate", "run one simulation; writes origin.csv and snapshots/")), cmd_simulate);
  bind(common(app.add_subcommand("fit", "fit a prior simulate output; writes fit.csv")), cmd_fit);
  bind(common(app.add_subcommand("predict", "evaluate analytic predictions; writes prediction.csv")), cmd_predict);
  bind(common(app.add_subcommand("stability", "matrices, spectra and von Neumann sweeps")), cmd_stability);
  bind(common(app.add_subcommand("converge", "time or space refinement study; writes table.csv")), cmd_converge);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  try {
    return handler(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const RunError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
