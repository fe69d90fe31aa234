#include "quenchflow/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace quenchflow {

namespace {

void check_spec(const OdeSpec& spec) {
  if (spec.n < 1) throw SpecError("ODE spec: n must be >= 1");
  if (!(spec.a > 0)) throw SpecError("ODE spec: a must be positive");
  if (!(spec.eps > 0)) throw SpecError("ODE spec: eps must be positive");
  if (!(spec.y0 > 0)) throw SpecError("ODE spec: y0 must be positive");
}

}  // namespace

OdeSpec make_ode_spec(int n, double a, double eps, double alpha, double b) {
  OdeSpec spec{n, a, eps, alpha, std::pow(eps, alpha) * b};
  check_spec(spec);
  return spec;
}

double ode_rhs(double y, const OdeSpec& spec) {
  if (!(y > 0))
    throw NonPositiveY("ode_rhs called with y = " + std::to_string(y));
  return -(spec.n - 1) / y + spec.a / spec.eps;
}

namespace {

constexpr double kMinStep = 1e-15;
constexpr double kRelTol = 1e-10;

// One classic RK4 step; returns false when an intermediate stage leaves the
// positive half-line (the step must shrink).
bool rk4_step(double y, double h, const OdeSpec& spec, double& out) {
  auto f = [&](double v, double& slope) {
    if (!(v > 0)) return false;
    slope = -(spec.n - 1) / v + spec.a / spec.eps;
    return true;
  };
  double k1, k2, k3, k4;
  if (!f(y, k1)) return false;
  if (!f(y + 0.5 * h * k1, k2)) return false;
  if (!f(y + 0.5 * h * k2, k3)) return false;
  if (!f(y + h * k3, k4)) return false;
  out = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
  return std::isfinite(out);
}

// Step-doubling error estimate: one step of size h against two of h/2;
// on acceptance returns the locally extrapolated value.
bool attempt(double y, double h, const OdeSpec& spec, double& y_out,
             double& err) {
  double coarse, half, fine;
  if (!rk4_step(y, h, spec, coarse)) return false;
  if (!rk4_step(y, 0.5 * h, spec, half)) return false;
  if (!rk4_step(half, 0.5 * h, spec, fine)) return false;
  err = std::abs(fine - coarse) / 15.0;
  y_out = fine + (fine - coarse) / 15.0;
  return std::isfinite(y_out);
}

}  // namespace

OdeTrajectory integrate_ode(const OdeSpec& spec, double t_end,
                            double y_floor) {
  check_spec(spec);
  if (!(t_end > 0)) throw SpecError("integrate_ode: t_end must be positive");
  if (!(y_floor > 0) || !(y_floor < spec.y0))
    throw SpecError("integrate_ode: need 0 < y_floor < y0");

  OdeTrajectory traj;
  double t = 0, y = spec.y0;
  traj.t.push_back(t);
  traj.y.push_back(y);

  const double cap_scale =
      0.05 * spec.eps / std::max(spec.a, static_cast<double>(spec.n - 1));
  const double slope0 = ode_rhs(y, spec);
  double h = std::min({cap_scale * y * y, t_end, 0.1});

  // the sign of the initial slope determines strict monotonicity throughout
  auto assert_monotone = [&]() {
    if (std::abs(slope0) <= 1e-13 * (1 + std::abs(spec.a / spec.eps))) return;
    for (std::size_t k = 1; k < traj.y.size(); ++k) {
      const bool ok = slope0 > 0 ? traj.y[k] > traj.y[k - 1]
                                 : traj.y[k] < traj.y[k - 1];
      if (!ok)
        throw Error("ODE trajectory lost strict monotonicity at sample " +
                    std::to_string(k));
    }
  };

  while (t < t_end) {
    h = std::min({h, cap_scale * y * y, t_end - t});
    if (h < kMinStep) {
      // A singularity-capped step this small means the floor is closer than
      // the time resolution; localize the event linearly.
      const double slope = ode_rhs(y, spec);
      if (slope < 0) {
        const double eta = (y - y_floor) / (-slope);
        if (eta <= 1e-9) {
          t += eta;
          y = y_floor;
          traj.t.push_back(t);
          traj.y.push_back(y);
          traj.event = OdeEventKind::HitFloor;
          traj.t_event = t;
          traj.y_event = y;
          assert_monotone();
          return traj;
        }
      }
      throw StepUnderflow("ODE step fell below 1e-15 at t = " +
                          std::to_string(t));
    }

    double y_new, err;
    if (!attempt(y, h, spec, y_new, err)) {
      h *= 0.5;
      continue;
    }
    const double scale = kRelTol * std::max(std::abs(y), std::abs(y_new));
    if (err > scale && h > kMinStep) {
      h *= std::max(0.1, 0.9 * std::pow(scale / err, 0.2));
      continue;
    }

    if (y_new <= y_floor) {
      // bisect the step length so the accepted state lands on the floor
      double lo = 0, hi = h;
      for (int i = 0; i < 80 && hi - lo > 1e-16 * (1 + h); ++i) {
        const double mid = 0.5 * (lo + hi);
        double y_mid;
        if (!rk4_step(y, mid, spec, y_mid) || y_mid <= y_floor)
          hi = mid;
        else
          lo = mid;
      }
      t += hi;
      y = y_floor;
      traj.t.push_back(t);
      traj.y.push_back(y);
      traj.event = OdeEventKind::HitFloor;
      traj.t_event = t;
      traj.y_event = y;
      assert_monotone();
      return traj;
    }

    t += h;
    y = y_new;
    traj.t.push_back(t);
    traj.y.push_back(y);
    if (err > 0)
      h *= std::min(2.0, 0.9 * std::pow(scale / err, 0.2));
    else
      h *= 2.0;
  }

  traj.event = OdeEventKind::ReachedHorizon;
  traj.t_event = t;
  traj.y_event = y;
  assert_monotone();
  return traj;
}

std::optional<double> ode_quench_time(const OdeSpec& spec) {
  check_spec(spec);
  const double c = spec.eps * (spec.n - 1);
  if (spec.a * spec.y0 >= c) return std::nullopt;  // nondecreasing solution
  return spec.eps * (-spec.y0 / spec.a +
                     (c / (spec.a * spec.a)) *
                         std::log(c / (c - spec.a * spec.y0)));
}

double trajectory_value(const OdeTrajectory& traj, const OdeSpec& spec,
                        double t) {
  if (traj.t.empty()) throw Error("empty trajectory");
  if (t <= traj.t.front()) return traj.y.front();
  if (t >= traj.t.back()) return traj.y.back();
  const auto it = std::upper_bound(traj.t.begin(), traj.t.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - traj.t.begin()) - 1;
  const double t0 = traj.t[k], t1 = traj.t[k + 1];
  const double y0 = traj.y[k], y1 = traj.y[k + 1];
  const double hseg = t1 - t0;
  const double s = (t - t0) / hseg;
  const double m0 = ode_rhs(y0, spec) * hseg;
  const double m1 = ode_rhs(y1, spec) * hseg;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * m0 +
         (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * m1;
}

LimitProfile limit_profile(const Expr& f, const Expr& g, int n,
                           const Grid& grid, double t) {
  if (t < 0) throw SpecError("limit_profile: t must be >= 0");
  const std::vector<double> f_nodes = sample_function(f, grid);
  const std::vector<double> g_nodes = sample_function(g, grid);

  LimitProfile out;
  out.w.resize(grid.J);
  out.quenched.assign(grid.J, 0);
  out.quench_time.assign(grid.J, 0);

  constexpr double kFloor = 1e-8;
  for (int j = 0; j < grid.J; ++j) {
    OdeSpec node_spec{n, f_nodes[j], 1.0, 1.0, g_nodes[j]};
    try {
      check_spec(node_spec);
      if (t == 0) {
        out.w[j] = g_nodes[j];
        continue;
      }
      const OdeTrajectory traj = integrate_ode(node_spec, t, kFloor);
      out.w[j] = traj.y_event;
      if (traj.event == OdeEventKind::HitFloor) {
        out.quenched[j] = 1;
        out.quench_time[j] = traj.t_event;
      }
    } catch (const Error& err) {
      throw Error(std::string(err.what()) + " (node " + std::to_string(j) +
                  ")");
    }
  }
  return out;
}

}  // namespace quenchflow
