#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "quenchflow/model.hpp"

namespace quenchflow {

enum class BarrierKind {
  ConstantOde,       // spatially constant trajectory of the reduced ODE
  Theorem1aSub,      // (n-1)/(f - delta), static floor in rescaled variables
  ShortTimeEnvelope,  // eps*g(x) +/- (C1/eps) t
  SineGradientSub,   // decaying sine bump under the gradient equation
};

enum class BarrierRole { Sub, Super };

enum class TargetEquation {
  ProfilePde,       // the evolution of u itself
  RescaledProfile,  // the equation satisfied by v = u/eps
  GradientV1,       // the differential inequality satisfied by v = u_x
};

// A closed-form comparison function with enough metadata to certify its
// one-sided residual sign on a validity window. Derivative callables are
// exact where available; residual evaluation falls back to centered
// differences when they are absent.
struct BarrierFn {
  BarrierKind kind = BarrierKind::ConstantOde;
  BarrierRole role = BarrierRole::Sub;
  TargetEquation target = TargetEquation::ProfilePde;

  std::function<double(double x, double t)> value;
  std::function<double(double x, double t)> d_t, d_x, d_xx;

  double t_begin = 0;
  double t_end = 0;  // validity window; +inf when unbounded

  std::map<std::string, double> constants;

  double constant(const std::string& name) const;
};

// Residual of a candidate against the profile evolution,
//   N[phi] = phi_t - phi_xx/(1+phi_x^2) + (n-1)/phi
//            - (f/eps) sqrt(1+phi_x^2),
// evaluated at the grid nodes at time t. N <= 0 marks a subsolution,
// N >= 0 a supersolution. Throws SingularState when the candidate is not
// strictly positive at a node.
std::vector<double> pde_residual(const BarrierFn& candidate,
                                 const ProblemSpec& spec, const Grid& grid,
                                 double t);

// Gridded variant: profile values and time derivative supplied per node,
// spatial derivatives by the same centered stencils the solver uses.
std::vector<double> pde_residual(std::span<const double> u,
                                 std::span<const double> u_t,
                                 const ProblemSpec& spec, const Grid& grid);

// Residual against the equation satisfied by v = u/eps:
//   N_v[phi] = eps^2 (phi_t - phi_xx/(1+eps^2 phi_x^2)) + (n-1)/phi
//              - f sqrt(1+eps^2 phi_x^2).
// Same sign convention as pde_residual.
std::vector<double> rescaled_residual(const BarrierFn& candidate,
                                      const ProblemSpec& spec,
                                      const Grid& grid, double t);

// Residual of a candidate w against the differential inequality for the
// gradient v = u_x on (a,b), given the run's gradient field at time t:
//   G[w] = w_t - w_xx/(ux^2+1) - f w w_x/sqrt(ux^2+1)
//          + 2 w (w_x)^2/(ux^2+1)^2,
// with G <= 0 for a subsolution. Only nodes with x in (a,b) are evaluated;
// other entries are zero.
std::vector<double> gradient_v1_residual(const BarrierFn& w,
                                         std::span<const double> ux,
                                         const ProblemSpec& spec,
                                         const Grid& grid, double t);

// The bracketed factor of the sine barrier's residual at one point; the
// barrier is a valid subsolution wherever this is <= 0.
double sine_bracket(const BarrierFn& w, double f_at_x, double ux, double x,
                    double t);

// Static subsolution psi(x) = (n-1)/(f(x)-delta) for the rescaled profile,
// valid for all time once eps <= eps0 = sqrt(delta / max|psi''|). Requires
// min f > delta > 0 and min (f-delta) g > n-1; throws HypothesisViolated
// otherwise. Constants: delta, c0 = min psi (the non-quench floor), eps0.
BarrierFn theorem1a_subsolution(const Expr& f, const Expr& g, double delta,
                                int n);

// Suggested slack: half the spare margin, delta = (min fg - (n-1))/(2 max g).
double propose_delta(const Expr& f, const Expr& g, int n);

// Short-time envelope pair (psi_minus, psi_plus) with
//   C1 = eps^2 max|g''| + max f * sqrt(eps^2 max(g')^2 + 1)
//        + 2(n-1)/min g,
//   psi+-(x,t) = eps g(x) +/- (C1/eps) t,
// valid on [0, sigma1], sigma1 = eps^2 min g / (2 C1). Requires alpha = 1.
// Constants on both: C1, sigma1.
std::pair<BarrierFn, BarrierFn> short_time_envelope(const ProblemSpec& spec);

// Gradient subsolution w(x,t) = c0 e^{-Mt} sin(pi (x-a)/(b-a)) on [a,b],
//   M = margin * ( pi^2/(b-a)^2 + pi c0 f_max/(b-a) ),
// vanishing at both ends. Requires 0 <= a < b <= 1/2, c0 > 0, margin > 1.
// Constants: M, c0, a, b, f_max, margin.
BarrierFn sine_gradient_subsolution(double c0, double a, double b,
                                    double f_max, double margin);

// Spatially constant barrier from the reduced ODE: a = max f, b = max g
// (supersolution) or a = min f, b = min g (subsolution). The evaluator
// interpolates a stored high-accuracy trajectory; its time derivative is the
// exact right-hand side, so the residual sign is exact. Constants: a, b, y0,
// and T_quench when the closed form gives one.
BarrierFn constant_barrier(const ProblemSpec& spec, bool use_max);

}  // namespace quenchflow
