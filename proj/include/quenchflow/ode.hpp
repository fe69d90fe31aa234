#pragma once

#include <optional>
#include <vector>

#include "quenchflow/model.hpp"

namespace quenchflow {

// Spatially constant reduction dy/dt = -(n-1)/y + a/eps, y(0) = y0.
struct OdeSpec {
  int n = 2;
  double a = 1;      // constant forcing, > 0
  double eps = 1;
  double alpha = 1;
  double y0 = 1;     // > 0; conventionally eps^alpha * b
};

OdeSpec make_ode_spec(int n, double a, double eps, double alpha, double b);

enum class OdeEventKind { HitFloor, ReachedHorizon };

struct OdeTrajectory {
  std::vector<double> t;
  std::vector<double> y;
  OdeEventKind event = OdeEventKind::ReachedHorizon;
  double t_event = 0;
  double y_event = 0;
};

// -(n-1)/y + a/eps. Throws NonPositiveY for y <= 0.
double ode_rhs(double y, const OdeSpec& spec);

// Adaptive RK4 with local error <= 1e-10 relative and the step cap
// h <= 0.05 * y^2 * eps / max(a, n-1) so the singular term stays resolved.
// Stops when y <= y_floor (the hit time is localized inside the crossing
// step) or when t reaches t_end. Throws StepUnderflow if the controller
// collapses the step below 1e-15 away from the floor.
OdeTrajectory integrate_ode(const OdeSpec& spec, double t_end, double y_floor);

// Exact quench time from the separable form, or nullopt when a*y0 >=
// eps*(n-1) (nondecreasing solution). With c = eps*(n-1):
//   T = eps * ( -y0/a + (c/a^2) * log( c / (c - a*y0) ) ).
std::optional<double> ode_quench_time(const OdeSpec& spec);

// Cubic Hermite interpolation of a trajectory (slopes from the right-hand
// side). t must lie within the sampled range.
double trajectory_value(const OdeTrajectory& traj, const OdeSpec& spec,
                        double t);

// Pointwise limit problem: at each node integrate dw/dt = -(n-1)/w + f(x_j)
// from w(0) = g(x_j). Nodes whose scalar problem quenches before t are
// flagged and carry their quench (floor-hit) time.
struct LimitProfile {
  std::vector<double> w;          // value at time t (floor value if quenched)
  std::vector<char> quenched;     // 1 if the node hit the floor before t
  std::vector<double> quench_time;  // valid where quenched
};

LimitProfile limit_profile(const Expr& f, const Expr& g, int n,
                           const Grid& grid, double t);

}  // namespace quenchflow
