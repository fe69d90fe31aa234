#include "quenchflow/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "quenchflow/ode.hpp"

namespace quenchflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kDense = 10000;  // hypothesis checks sample this many points

struct Extrema {
  double min_v = kInf;
  double max_v = -kInf;
  double argmin_x = 0;
  double argmax_x = 0;
};

Extrema dense_extrema(const Expr& e) {
  Extrema ex;
  for (int i = 0; i < kDense; ++i) {
    const double x = i / static_cast<double>(kDense);
    const double v = e.eval(x);
    if (v < ex.min_v) {
      ex.min_v = v;
      ex.argmin_x = x;
    }
    if (v > ex.max_v) {
      ex.max_v = v;
      ex.argmax_x = x;
    }
  }
  return ex;
}

double dense_abs_max(const Expr& e) {
  double m = 0;
  for (int i = 0; i < kDense; ++i)
    m = std::max(m, std::abs(e.eval(i / static_cast<double>(kDense))));
  return m;
}

struct PointDerivatives {
  double v, vt, vx, vxx;
};

// Closed-form derivatives when the barrier carries them, centered
// differences otherwise (grid spacing in x, 1e-6 in t).
PointDerivatives candidate_derivatives(const BarrierFn& c, double x, double t,
                                       double dx) {
  PointDerivatives d;
  d.v = c.value(x, t);
  if (c.d_t) {
    d.vt = c.d_t(x, t);
  } else {
    const double ht = 1e-6;
    d.vt = (c.value(x, t + ht) - c.value(x, t - ht)) / (2 * ht);
  }
  if (c.d_x && c.d_xx) {
    d.vx = c.d_x(x, t);
    d.vxx = c.d_xx(x, t);
  } else {
    const double vp = c.value(x + dx, t);
    const double vm = c.value(x - dx, t);
    d.vx = (vp - vm) / (2 * dx);
    d.vxx = ((vp + vm) - 2 * d.v) / (dx * dx);
  }
  return d;
}

}  // namespace

double BarrierFn::constant(const std::string& name) const {
  const auto it = constants.find(name);
  if (it == constants.end())
    throw Error("barrier has no constant named '" + name + "'");
  return it->second;
}

std::vector<double> pde_residual(const BarrierFn& candidate,
                                 const ProblemSpec& spec, const Grid& grid,
                                 double t) {
  if (candidate.target == TargetEquation::GradientV1)
    throw SpecError("gradient barriers need gradient_v1_residual");
  const std::vector<double> f_nodes = sample_function(spec.f, grid);
  std::vector<double> out(grid.J);
  const double nm1 = spec.n - 1;
  for (int j = 0; j < grid.J; ++j) {
    const double x = grid.node(j);
    const PointDerivatives d =
        candidate_derivatives(candidate, x, t, grid.dx);
    if (!(d.v > 0))
      throw SingularState("candidate is non-positive at node " +
                          std::to_string(j));
    const double slope_sq = d.vx * d.vx;
    out[j] = d.vt - d.vxx / (1 + slope_sq) + nm1 / d.v -
             (f_nodes[j] / spec.eps) * std::sqrt(1 + slope_sq);
  }
  return out;
}

std::vector<double> pde_residual(std::span<const double> u,
                                 std::span<const double> u_t,
                                 const ProblemSpec& spec, const Grid& grid) {
  const std::vector<double> f_nodes = sample_function(spec.f, grid);
  std::vector<double> out(grid.J);
  const int J = grid.J;
  const double inv2dx = 0.5 / grid.dx;
  const double invdx2 = 1.0 / (grid.dx * grid.dx);
  const double nm1 = spec.n - 1;
  for (int j = 0; j < J; ++j) {
    if (!(u[j] > 0))
      throw SingularState("candidate is non-positive at node " +
                          std::to_string(j));
    const double up = u[j + 1 == J ? 0 : j + 1];
    const double um = u[j == 0 ? J - 1 : j - 1];
    const double d1 = (up - um) * inv2dx;
    const double d2 = ((up + um) - 2.0 * u[j]) * invdx2;
    out[j] = u_t[j] - d2 / (1 + d1 * d1) + nm1 / u[j] -
             (f_nodes[j] / spec.eps) * std::sqrt(1 + d1 * d1);
  }
  return out;
}

std::vector<double> rescaled_residual(const BarrierFn& candidate,
                                      const ProblemSpec& spec,
                                      const Grid& grid, double t) {
  if (candidate.target == TargetEquation::GradientV1)
    throw SpecError("gradient barriers need gradient_v1_residual");
  const std::vector<double> f_nodes = sample_function(spec.f, grid);
  std::vector<double> out(grid.J);
  const double nm1 = spec.n - 1;
  const double eps2 = spec.eps * spec.eps;
  for (int j = 0; j < grid.J; ++j) {
    const double x = grid.node(j);
    const PointDerivatives d =
        candidate_derivatives(candidate, x, t, grid.dx);
    if (!(d.v > 0))
      throw SingularState("candidate is non-positive at node " +
                          std::to_string(j));
    const double slope_sq = eps2 * d.vx * d.vx;
    out[j] = eps2 * (d.vt - d.vxx / (1 + slope_sq)) + nm1 / d.v -
             f_nodes[j] * std::sqrt(1 + slope_sq);
  }
  return out;
}

std::vector<double> gradient_v1_residual(const BarrierFn& w,
                                         std::span<const double> ux,
                                         const ProblemSpec& spec,
                                         const Grid& grid, double t) {
  if (w.target != TargetEquation::GradientV1)
    throw SpecError("gradient_v1_residual needs a gradient barrier");
  const std::vector<double> f_nodes = sample_function(spec.f, grid);
  const double a = w.constant("a");
  const double b = w.constant("b");
  std::vector<double> out(grid.J, 0.0);
  for (int j = 0; j < grid.J; ++j) {
    const double x = grid.node(j);
    if (x <= a || x >= b) continue;
    const PointDerivatives d = candidate_derivatives(w, x, t, grid.dx);
    const double s = ux[j] * ux[j] + 1;
    out[j] = d.vt - d.vxx / s - f_nodes[j] * d.v * d.vx / std::sqrt(s) +
             2 * d.v * d.vx * d.vx / (s * s);
  }
  return out;
}

double sine_bracket(const BarrierFn& w, double f_at_x, double ux, double x,
                    double t) {
  const double M = w.constant("M");
  const double c0 = w.constant("c0");
  const double a = w.constant("a");
  const double b = w.constant("b");
  const double L = b - a;
  const double theta = std::numbers::pi * (x - a) / L;
  const double s = ux * ux + 1;
  const double decay = c0 * std::exp(-M * t);
  const double piL = std::numbers::pi / L;
  return -M + piL * piL / s -
         f_at_x * decay * piL * std::cos(theta) / std::sqrt(s) +
         2 * decay * decay * piL * piL * std::cos(theta) * std::cos(theta) /
             (s * s);
}

BarrierFn theorem1a_subsolution(const Expr& f, const Expr& g, double delta,
                                int n) {
  if (n < 2) throw HypothesisViolated("needs n >= 2");
  if (!(delta > 0)) throw HypothesisViolated("delta must be positive");

  const Extrema fex = dense_extrema(f);
  if (!(fex.min_v > delta))
    throw HypothesisViolated("min f = " + std::to_string(fex.min_v) +
                             " <= delta at x = " +
                             std::to_string(fex.argmin_x));

  // min over x of (f(x)-delta) g(x) must exceed n-1
  double worst = kInf, worst_x = 0;
  for (int i = 0; i < kDense; ++i) {
    const double x = i / static_cast<double>(kDense);
    const double v = (f.eval(x) - delta) * g.eval(x);
    if (v < worst) {
      worst = v;
      worst_x = x;
    }
  }
  if (!(worst > n - 1))
    throw HypothesisViolated(
        "min (f-delta) g = " + std::to_string(worst) + " <= n-1 = " +
        std::to_string(n - 1) + " at x = " + std::to_string(worst_x));

  const Expr psi =
      Expr::div(Expr::constant(n - 1), Expr::sub(f, Expr::constant(delta)));
  const Expr psi_x = psi.derivative();
  const Expr psi_xx = psi_x.derivative();

  double c0 = kInf;
  for (int i = 0; i < kDense; ++i)
    c0 = std::min(c0, psi.eval(i / static_cast<double>(kDense)));
  const double c_delta = dense_abs_max(psi_xx);
  const double eps0 = c_delta > 0 ? std::sqrt(delta / c_delta) : kInf;

  BarrierFn bar;
  bar.kind = BarrierKind::Theorem1aSub;
  bar.role = BarrierRole::Sub;
  bar.target = TargetEquation::RescaledProfile;
  bar.value = [psi](double x, double) { return psi.eval(x); };
  bar.d_t = [](double, double) { return 0.0; };
  bar.d_x = [psi_x](double x, double) { return psi_x.eval(x); };
  bar.d_xx = [psi_xx](double x, double) { return psi_xx.eval(x); };
  bar.t_begin = 0;
  bar.t_end = kInf;
  bar.constants = {{"delta", delta}, {"c0", c0}, {"eps0", eps0},
                   {"n", static_cast<double>(n)}};
  return bar;
}

double propose_delta(const Expr& f, const Expr& g, int n) {
  double min_fg = kInf, max_g = -kInf;
  for (int i = 0; i < kDense; ++i) {
    const double x = i / static_cast<double>(kDense);
    min_fg = std::min(min_fg, f.eval(x) * g.eval(x));
    max_g = std::max(max_g, g.eval(x));
  }
  return 0.5 * (min_fg - (n - 1)) / max_g;
}

std::pair<BarrierFn, BarrierFn> short_time_envelope(const ProblemSpec& spec) {
  if (spec.alpha != 1.0)
    throw SpecError("short-time envelope requires alpha = 1");
  const Expr g = spec.g;
  const Expr gp = g.derivative();
  const Expr gpp = gp.derivative();

  const double max_gpp = dense_abs_max(gpp);
  const double max_gp = dense_abs_max(gp);
  const double f_bar = dense_extrema(spec.f).max_v;
  const double g_lo = dense_extrema(g).min_v;
  if (!(g_lo > 0)) throw SpecError("g must be positive");

  const double eps = spec.eps;
  const double c1 = eps * eps * max_gpp +
                    f_bar * std::sqrt(eps * eps * max_gp * max_gp + 1.0) +
                    2.0 * (spec.n - 1) / g_lo;
  const double sigma1 = eps * eps * g_lo / (2.0 * c1);

  auto make = [&](double sign) {
    BarrierFn bar;
    bar.kind = BarrierKind::ShortTimeEnvelope;
    bar.role = sign > 0 ? BarrierRole::Super : BarrierRole::Sub;
    bar.target = TargetEquation::ProfilePde;
    bar.value = [g, eps, c1, sign](double x, double t) {
      return eps * g.eval(x) + sign * (c1 / eps) * t;
    };
    bar.d_t = [c1, eps, sign](double, double) { return sign * c1 / eps; };
    bar.d_x = [gp, eps](double x, double) { return eps * gp.eval(x); };
    bar.d_xx = [gpp, eps](double x, double) { return eps * gpp.eval(x); };
    bar.t_begin = 0;
    bar.t_end = sigma1;
    bar.constants = {{"C1", c1}, {"sigma1", sigma1}};
    return bar;
  };
  return {make(-1.0), make(+1.0)};
}

BarrierFn sine_gradient_subsolution(double c0, double a, double b,
                                    double f_max, double margin) {
  if (!(0 <= a && a < b && b <= 0.5))
    throw InvalidInterval("need 0 <= a < b <= 1/2, got [" +
                          std::to_string(a) + ", " + std::to_string(b) + "]");
  if (!(c0 > 0)) throw InvalidInterval("c0 must be positive");
  if (!(margin > 1)) throw InvalidInterval("margin must exceed 1");

  const double L = b - a;
  const double pi = std::numbers::pi;
  const double m_val = margin * (pi * pi / (L * L) + pi * c0 * f_max / L);

  BarrierFn bar;
  bar.kind = BarrierKind::SineGradientSub;
  bar.role = BarrierRole::Sub;
  bar.target = TargetEquation::GradientV1;
  bar.value = [c0, m_val, a, b, L, pi](double x, double t) {
    if (x <= a || x >= b) return 0.0;
    return c0 * std::exp(-m_val * t) * std::sin(pi * (x - a) / L);
  };
  bar.d_t = [c0, m_val, a, b, L, pi](double x, double t) {
    if (x <= a || x >= b) return 0.0;
    return -m_val * c0 * std::exp(-m_val * t) * std::sin(pi * (x - a) / L);
  };
  bar.d_x = [c0, m_val, a, b, L, pi](double x, double t) {
    if (x < a || x > b) return 0.0;
    return c0 * std::exp(-m_val * t) * (pi / L) * std::cos(pi * (x - a) / L);
  };
  bar.d_xx = [c0, m_val, a, b, L, pi](double x, double t) {
    if (x <= a || x >= b) return 0.0;
    return -c0 * std::exp(-m_val * t) * (pi / L) * (pi / L) *
           std::sin(pi * (x - a) / L);
  };
  bar.t_begin = 0;
  bar.t_end = kInf;
  bar.constants = {{"M", m_val}, {"c0", c0},       {"a", a},
                   {"b", b},     {"f_max", f_max}, {"margin", margin}};
  return bar;
}

BarrierFn constant_barrier(const ProblemSpec& spec, bool use_max) {
  const Extrema fex = dense_extrema(spec.f);
  const Extrema gex = dense_extrema(spec.g);
  const double a = use_max ? fex.max_v : fex.min_v;
  const double b = use_max ? gex.max_v : gex.min_v;
  if (!(a > 0) || !(b > 0))
    throw SpecError("constant barrier needs positive f and g");

  OdeSpec ode{spec.n, a, spec.eps, spec.alpha,
              std::pow(spec.eps, spec.alpha) * b};
  const auto t_quench = ode_quench_time(ode);

  // integrate far enough to cover the horizon or (nearly) the quench
  const double floor = 1e-4 * ode.y0;
  const double t_max = spec.t_max > 0 ? spec.t_max : default_t_max(spec);
  const double horizon = t_quench ? *t_quench * 2.0 : t_max;
  auto traj = std::make_shared<OdeTrajectory>(
      integrate_ode(ode, horizon, floor));

  BarrierFn bar;
  bar.kind = BarrierKind::ConstantOde;
  bar.role = use_max ? BarrierRole::Super : BarrierRole::Sub;
  bar.target = TargetEquation::ProfilePde;
  bar.value = [traj, ode](double, double t) {
    return trajectory_value(*traj, ode, t);
  };
  // exact slope through the equation keeps the residual sign exact
  bar.d_t = [traj, ode](double, double t) {
    return ode_rhs(trajectory_value(*traj, ode, t), ode);
  };
  bar.d_x = [](double, double) { return 0.0; };
  bar.d_xx = [](double, double) { return 0.0; };
  bar.t_begin = 0;
  bar.t_end = traj->t_event;
  bar.constants = {{"a", a}, {"b", b}, {"y0", ode.y0}};
  if (t_quench) bar.constants["T_quench"] = *t_quench;
  return bar;
}

}  // namespace quenchflow
