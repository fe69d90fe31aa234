#include "quenchflow/model.hpp"

#include <algorithm>
#include <cmath>

namespace quenchflow {

std::string scheme_name(Scheme s) {
  return s == Scheme::ExplicitMonotone ? "explicit-monotone" : "imex";
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "explicit-monotone") return Scheme::ExplicitMonotone;
  if (name == "imex") return Scheme::Imex;
  throw SpecError("unknown scheme '" + name +
                  "' (expected explicit-monotone or imex)");
}

Grid build_grid(int J) {
  if (J < 16 || J % 2 != 0)
    throw InvalidResolution("grid resolution must be even and >= 16, got " +
                            std::to_string(J));
  return Grid{J, 1.0 / J};
}

ProblemSpec make_problem_spec(const std::string& f_src,
                              const std::string& g_src) {
  ProblemSpec spec;
  spec.f_src = f_src;
  spec.g_src = g_src;
  spec.f = parse_expr(f_src);
  spec.g = parse_expr(g_src);
  return spec;
}

namespace {

constexpr int kDenseSamples = 4096;

double dense_max(const Expr& e) {
  double m = e.eval(0.0);
  for (int i = 1; i < kDenseSamples; ++i)
    m = std::max(m, e.eval(i / static_cast<double>(kDenseSamples)));
  return m;
}

}  // namespace

double default_theta_q(const ProblemSpec& spec) {
  const double dx = 1.0 / spec.J;
  return 10.0 * dx * std::pow(spec.eps, std::min(spec.alpha, 1.0));
}

double default_t_max(const ProblemSpec& spec) {
  const double gmax = dense_max(spec.g);
  const double denom = std::max(spec.n - 1, 1);
  return 10.0 * spec.eps * spec.eps * gmax * gmax / denom;
}

void finalize_spec(ProblemSpec& spec) {
  if (spec.n < 1) throw SpecError("dimension n must be >= 1");
  if (spec.f.empty() || spec.g.empty())
    throw SpecError("problem spec is missing f or g");
  if (!(spec.eps > 0)) throw SpecError("eps must be positive");
  if (!(spec.alpha > 0)) throw SpecError("alpha must be positive");
  if (spec.J < 16 || spec.J % 2 != 0)
    throw SpecError("J must be even and >= 16, got " + std::to_string(spec.J));
  if (!(spec.dt_max > 0)) throw SpecError("dt_max must be positive");
  if (spec.sample_every < 1) throw SpecError("sample_every must be >= 1");
  if (spec.snapshot_stride < 1) throw SpecError("snapshot_stride must be >= 1");
  if (!(spec.c_diff > 0) || !(spec.c_react > 0) || !(spec.c_force > 0))
    throw SpecError("step-size cap coefficients must be positive");

  if (spec.theta_q <= 0) spec.theta_q = default_theta_q(spec);
  if (spec.t_max <= 0) spec.t_max = default_t_max(spec);

  // the run must start strictly above the quench threshold
  const Grid grid = build_grid(spec.J);
  const std::vector<double> g_nodes = sample_function(spec.g, grid);
  const double gmin = *std::min_element(g_nodes.begin(), g_nodes.end());
  const double u0_min = std::pow(spec.eps, spec.alpha) * gmin;
  if (!(u0_min > spec.theta_q))
    throw SpecError(
        "initial profile does not clear the quench threshold: eps^alpha*min g "
        "= " +
        std::to_string(u0_min) + " <= theta_q = " +
        std::to_string(spec.theta_q));
}

std::vector<double> sample_function(const Expr& e, const Grid& grid) {
  std::vector<double> out(grid.J);
  for (int j = 0; j < grid.J; ++j) {
    try {
      out[j] = e.eval(grid.node(j));
    } catch (const EvalError& err) {
      throw EvalError(err.kind, err.x,
                      std::string(err.what()) + " (node " + std::to_string(j) +
                          ")");
    }
  }
  return out;
}

}  // namespace quenchflow
