#pragma once

#include <string>
#include <vector>

#include "quenchflow/expr.hpp"

namespace quenchflow {

enum class Scheme { ExplicitMonotone, Imex };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);  // throws SpecError

// Uniform periodic grid on [0,1). J must be even so that x = 1/2 is a node;
// index arithmetic is mod J (j = -1 and j = J-1 are the same node).
struct Grid {
  int J = 0;
  double dx = 0;

  double node(int j) const { return j * dx; }
  int wrap(int j) const { return ((j % J) + J) % J; }
};

Grid build_grid(int J);  // throws InvalidResolution if J < 16 or odd

// Profile values on the grid at one instant.
struct State {
  double t = 0;
  std::vector<double> u;
};

// Full definition of one evolution problem, including numerics options.
// t_max and theta_q may be left <= 0 to request the documented defaults;
// finalize_spec fills them in.
struct ProblemSpec {
  int n = 2;  // ambient splitting dimension; singular coefficient is n-1

  std::string f_src, g_src;
  Expr f, g;

  double eps = 1.0;
  double alpha = 1.0;
  int J = 256;
  double t_max = -1;    // horizon
  double theta_q = -1;  // quench threshold
  Scheme scheme = Scheme::ExplicitMonotone;
  double dt_max = 1e-2;

  // step-size cap coefficients (diffusion, reaction, forcing)
  double c_diff = 0.4;
  double c_react = 0.05;
  double c_force = 0.1;

  int sample_every = 1;      // record diagnostics every k-th step
  int snapshot_stride = 64;  // keep a profile snapshot every k-th sample
};

ProblemSpec make_problem_spec(const std::string& f_src,
                              const std::string& g_src);

// theta_q default: 10 * dx * eps^min(alpha,1). Below roughly ten cells of
// amplitude a pinch is under-resolved, so the threshold scales with both
// grid and solution size.
double default_theta_q(const ProblemSpec& spec);

// t_max default: 10 * eps^2 * (max g)^2 / max(n-1, 1), several multiples of
// the natural collapse timescale.
double default_t_max(const ProblemSpec& spec);

// Fills defaulted fields and checks every invariant (J even >= 16, positive
// parameters, initial profile strictly above theta_q). Throws SpecError.
void finalize_spec(ProblemSpec& spec);

// Values of e at the grid nodes. Evaluation errors are rethrown with the
// failing node index in the message.
std::vector<double> sample_function(const Expr& e, const Grid& grid);

}  // namespace quenchflow
