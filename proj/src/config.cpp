#include "quenchflow/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace quenchflow {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void type_error(int line, const std::string& key,
                             const std::string& why) {
  throw ConfigError(ConfigError::Kind::TypeMismatch, line,
                    "line " + std::to_string(line) + ": value for '" + key +
                        "' " + why);
}

double to_double(int line, const std::string& key, const std::string& v) {
  double out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    type_error(line, key, "is not a number: '" + v + "'");
  return out;
}

int to_int(int line, const std::string& key, const std::string& v) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    type_error(line, key, "is not an integer: '" + v + "'");
  return out;
}

bool to_bool(int line, const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  type_error(line, key, "is not a boolean: '" + v + "'");
}

std::vector<double> to_list(int line, const std::string& key,
                            const std::string& v) {
  std::vector<double> out;
  std::istringstream ss(v);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (cell.empty()) type_error(line, key, "has an empty list entry");
    out.push_back(to_double(line, key, cell));
  }
  if (out.empty()) type_error(line, key, "is an empty list");
  return out;
}

}  // namespace

Config parse_config(const std::string& text) {
  Config cfg;
  bool have_f = false, have_g = false;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(ConfigError::Kind::TypeMismatch, line_no,
                        "line " + std::to_string(line_no) +
                            ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(ConfigError::Kind::TypeMismatch, line_no,
                        "line " + std::to_string(line_no) +
                            ": empty key or value");

    if (key == "f") {
      cfg.f_src = value;
      have_f = true;
    } else if (key == "g") {
      cfg.g_src = value;
      have_g = true;
    } else if (key == "n") {
      cfg.n = to_int(line_no, key, value);
      if (cfg.n < 1) type_error(line_no, key, "must be >= 1");
    } else if (key == "J") {
      cfg.J = to_int(line_no, key, value);
      if (cfg.J < 16 || cfg.J % 2 != 0)
        type_error(line_no, key, "must be even and >= 16");
    } else if (key == "eps") {
      cfg.eps = to_double(line_no, key, value);
      if (!(cfg.eps > 0)) type_error(line_no, key, "must be positive");
    } else if (key == "alpha") {
      cfg.alpha = to_double(line_no, key, value);
      if (!(cfg.alpha > 0)) type_error(line_no, key, "must be positive");
    } else if (key == "t_max") {
      cfg.t_max = to_double(line_no, key, value);
      if (!(cfg.t_max > 0)) type_error(line_no, key, "must be positive");
    } else if (key == "theta_q") {
      cfg.theta_q = to_double(line_no, key, value);
      if (!(cfg.theta_q > 0)) type_error(line_no, key, "must be positive");
    } else if (key == "scheme") {
      try {
        cfg.scheme = scheme_from_name(value);
      } catch (const SpecError& e) {
        type_error(line_no, key, e.what());
      }
    } else if (key == "dt_max") {
      cfg.dt_max = to_double(line_no, key, value);
      if (!(cfg.dt_max > 0)) type_error(line_no, key, "must be positive");
    } else if (key == "sample_every") {
      cfg.sample_every = to_int(line_no, key, value);
      if (cfg.sample_every < 1) type_error(line_no, key, "must be >= 1");
    } else if (key == "snapshot_stride") {
      cfg.snapshot_stride = to_int(line_no, key, value);
      if (cfg.snapshot_stride < 1) type_error(line_no, key, "must be >= 1");
    } else if (key == "sweep_axis") {
      try {
        cfg.sweep_axis = axis_from_name(value);
      } catch (const SpecError& e) {
        type_error(line_no, key, e.what());
      }
    } else if (key == "sweep_values") {
      cfg.sweep_values = to_list(line_no, key, value);
    } else if (key == "horizon") {
      cfg.horizon = to_double(line_no, key, value);
      if (!(*cfg.horizon > 0)) type_error(line_no, key, "must be positive");
    } else if (key == "eps_list") {
      cfg.eps_list = to_list(line_no, key, value);
    } else if (key == "lattice_points") {
      cfg.lattice_points = to_int(line_no, key, value);
      if (cfg.lattice_points < 1) type_error(line_no, key, "must be >= 1");
    } else if (key == "override_hypothesis") {
      cfg.override_hypothesis = to_bool(line_no, key, value);
    } else if (key == "a_star") {
      cfg.a_star = to_double(line_no, key, value);
    } else if (key == "barrier_a") {
      cfg.barrier_a = to_double(line_no, key, value);
    } else if (key == "barrier_b") {
      cfg.barrier_b = to_double(line_no, key, value);
    } else if (key == "barrier_margin") {
      cfg.barrier_margin = to_double(line_no, key, value);
    } else if (key == "assume_samples") {
      cfg.assume_samples = to_int(line_no, key, value);
      if (cfg.assume_samples < 16) type_error(line_no, key, "must be >= 16");
    } else if (key == "assume_tol") {
      cfg.assume_tol = to_double(line_no, key, value);
    } else if (key == "out_dir") {
      cfg.out_dir = value;
    } else if (key == "mesh_segments") {
      cfg.mesh_segments = to_int(line_no, key, value);
      if (cfg.mesh_segments < 3) type_error(line_no, key, "must be >= 3");
    } else {
      throw ConfigError(ConfigError::Kind::UnknownKey, line_no,
                        "line " + std::to_string(line_no) +
                            ": unknown key '" + key + "'");
    }
  }

  if (!have_f)
    throw ConfigError(ConfigError::Kind::MissingKey, 0,
                      "missing required key 'f'");
  if (!have_g)
    throw ConfigError(ConfigError::Kind::MissingKey, 0,
                      "missing required key 'g'");
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ProblemSpec Config::to_problem_spec() const {
  ProblemSpec spec = make_problem_spec(f_src, g_src);
  spec.n = n;
  spec.J = J;
  spec.eps = eps;
  spec.alpha = alpha;
  spec.t_max = t_max;
  spec.theta_q = theta_q;
  spec.scheme = scheme;
  spec.dt_max = dt_max;
  spec.sample_every = sample_every;
  spec.snapshot_stride = snapshot_stride;
  return spec;
}

SweepPlan Config::to_sweep_plan() const {
  SweepPlan plan;
  plan.base = to_problem_spec();
  plan.axis = sweep_axis;
  plan.values = sweep_values;
  plan.horizon = horizon;
  plan.out_dir = out_dir;
  return plan;
}

}  // namespace quenchflow
