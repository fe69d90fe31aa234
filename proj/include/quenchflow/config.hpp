#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "quenchflow/experiments.hpp"

namespace quenchflow {

// Flat key = value document. '#' starts a comment, whitespace around keys
// and values is trimmed, expression values run verbatim to end of line.
// Unknown keys are rejected; f and g are required, everything else has a
// documented default.
struct Config {
  // problem
  std::string f_src, g_src;
  int n = 2;
  int J = 256;
  double eps = 1.0;
  double alpha = 1.0;
  double t_max = -1;
  double theta_q = -1;
  Scheme scheme = Scheme::ExplicitMonotone;
  double dt_max = 1e-2;
  int sample_every = 1;
  int snapshot_stride = 64;

  // sweep
  SweepAxis sweep_axis = SweepAxis::Eps;
  std::vector<double> sweep_values;
  std::optional<double> horizon;

  // limit study
  std::vector<double> eps_list;
  int lattice_points = 9;
  bool override_hypothesis = false;

  // location study
  double a_star = 0.1;
  double barrier_a = 0.05;
  double barrier_b = 0.45;
  double barrier_margin = 1.25;

  // validation
  int assume_samples = 10000;
  double assume_tol = 1e-9;

  // output
  std::string out_dir = "out";
  int mesh_segments = 64;

  ProblemSpec to_problem_spec() const;  // requires f and g
  SweepPlan to_sweep_plan() const;
};

Config parse_config(const std::string& text);
Config load_config(const std::string& path);

}  // namespace quenchflow
