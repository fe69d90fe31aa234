#include "quenchflow/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace quenchflow {

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Quenched:
      return "Quenched";
    case Verdict::SurvivedToHorizon:
      return "SurvivedToHorizon";
    default:
      return "Aborted";
  }
}

Verdict verdict_from_name(const std::string& name) {
  if (name == "Quenched") return Verdict::Quenched;
  if (name == "SurvivedToHorizon") return Verdict::SurvivedToHorizon;
  if (name == "Aborted") return Verdict::Aborted;
  throw Error("unknown verdict '" + name + "'");
}

namespace {

struct Diagnostics {
  double u_min = 0;
  int argmin = 0;
  double u_max = 0;
  double ux_max = 0;
  double min_d1sq = 0;
  double rhs_max = 0;
};

// Right-hand side plus the reductions the step controller and the record
// need. The D2 stencil is written as (up + um) - 2u so mirrored nodes see
// bitwise-identical arithmetic.
Diagnostics rhs_and_diagnostics(std::span<const double> u,
                                std::span<const double> f_nodes, int n,
                                double eps, const Grid& grid,
                                std::span<double> out) {
  const int J = grid.J;
  const double inv2dx = 0.5 / grid.dx;
  const double invdx2 = 1.0 / (grid.dx * grid.dx);
  const double nm1 = n - 1;

  Diagnostics d;
  d.u_min = u[0];
  d.u_max = u[0];
  d.ux_max = 0;
  d.min_d1sq = std::numeric_limits<double>::max();
  d.rhs_max = 0;

  for (int j = 0; j < J; ++j) {
    const double uj = u[j];
    if (!(uj > 0)) throw SingularState("profile is non-positive at node " +
                                       std::to_string(j));
    const double up = u[j + 1 == J ? 0 : j + 1];
    const double um = u[j == 0 ? J - 1 : j - 1];
    const double d1 = (up - um) * inv2dx;
    const double d1sq = d1 * d1;
    const double d2 = ((up + um) - 2.0 * uj) * invdx2;
    const double r =
        d2 / (1.0 + d1sq) - nm1 / uj + (f_nodes[j] / eps) * std::sqrt(1.0 + d1sq);
    out[j] = r;

    if (uj < d.u_min) {
      d.u_min = uj;
      d.argmin = j;
    }
    if (uj > d.u_max) d.u_max = uj;
    const double ad1 = std::abs(d1);
    if (ad1 > d.ux_max) d.ux_max = ad1;
    if (d1sq < d.min_d1sq) d.min_d1sq = d1sq;
    const double ar = std::abs(r);
    if (ar > d.rhs_max) d.rhs_max = ar;
  }
  return d;
}

bool reflection_symmetric(std::span<const double> v) {
  const int J = static_cast<int>(v.size());
  for (int j = 1; j < J / 2; ++j)
    if (v[j] != v[J - j]) return false;
  return true;
}

void symmetrize(std::span<double> v) {
  const int J = static_cast<int>(v.size());
  for (int j = 1; j < J / 2; ++j) {
    const double m = 0.5 * (v[j] + v[J - j]);
    v[j] = m;
    v[J - j] = m;
  }
}

// Cyclic tridiagonal solve (Thomas sweep plus a rank-one correction).
// sub[j], diag[j], sup[j] are the coefficients of row j; corner_first is the
// row-0 coefficient on x_{J-1}, corner_last the row-(J-1) coefficient on x_0.
void cyclic_tridiagonal_solve(std::span<const double> sub,
                              std::span<const double> diag,
                              std::span<const double> sup, double corner_first,
                              double corner_last, std::span<const double> rhs,
                              std::span<double> x, std::vector<double>& bb,
                              std::vector<double>& z,
                              std::vector<double>& scratch) {
  const int J = static_cast<int>(diag.size());
  const double gamma = -diag[0];

  bb.assign(diag.begin(), diag.end());
  bb[0] = diag[0] - gamma;
  bb[J - 1] = diag[J - 1] - corner_first * corner_last / gamma;

  auto thomas = [&](std::span<const double> b, std::span<const double> r,
                    std::span<double> sol) {
    double* c = scratch.data();  // modified super-diagonal
    double piv = b[0];
    if (std::abs(piv) < 1e-300)
      throw LinearSolveFailure("zero pivot in tridiagonal solve");
    c[0] = sup[0] / piv;
    sol[0] = r[0] / piv;
    for (int j = 1; j < J; ++j) {
      piv = b[j] - sub[j] * c[j - 1];
      if (std::abs(piv) < 1e-300)
        throw LinearSolveFailure("zero pivot in tridiagonal solve at row " +
                                 std::to_string(j));
      c[j] = sup[j] / piv;
      sol[j] = (r[j] - sub[j] * sol[j - 1]) / piv;
    }
    for (int j = J - 2; j >= 0; --j) sol[j] -= c[j] * sol[j + 1];
  };

  thomas(bb, rhs, x);

  z.assign(J, 0.0);
  std::vector<double>& unit = z;
  unit[0] = gamma;
  unit[J - 1] = corner_last;
  std::vector<double> zsol(J);
  thomas(bb, unit, zsol);

  const double numer = x[0] + corner_first * x[J - 1] / gamma;
  const double denom = 1.0 + zsol[0] + corner_first * zsol[J - 1] / gamma;
  if (std::abs(denom) < 1e-300)
    throw LinearSolveFailure("singular cyclic correction");
  const double fact = numer / denom;
  for (int j = 0; j < J; ++j) x[j] -= fact * zsol[j];
}

struct Stepper {
  Grid grid;
  int n;
  double eps;
  Scheme scheme;
  std::vector<double> f_nodes;
  double f_max;
  bool f_symmetric;

  std::vector<double> rhs, sub, diag, sup, b, bb, z, scratch;

  Stepper(const ProblemSpec& spec, const Grid& g)
      : grid(g), n(spec.n), eps(spec.eps), scheme(spec.scheme) {
    f_nodes = sample_function(spec.f, grid);
    f_max = *std::max_element(f_nodes.begin(), f_nodes.end());
    f_symmetric = reflection_symmetric(f_nodes);
    const std::size_t J = static_cast<std::size_t>(grid.J);
    rhs.resize(J);
    sub.resize(J);
    diag.resize(J);
    sup.resize(J);
    b.resize(J);
    scratch.resize(J);
  }

  Diagnostics refresh(std::span<const double> u) {
    return rhs_and_diagnostics(u, f_nodes, n, eps, grid, rhs);
  }

  // advance into `out`, with `rhs` already holding the current right-hand
  // side (explicit path) / the current state's gradients (imex path)
  void advance(std::span<const double> u, double dt, std::span<double> out) {
    const int J = grid.J;
    if (scheme == Scheme::ExplicitMonotone) {
      for (int j = 0; j < J; ++j) out[j] = u[j] + dt * rhs[j];
      return;
    }

    // imex: freeze the diffusion coefficient 1/(1+D1^2) at the old state
    const double inv2dx = 0.5 / grid.dx;
    const double invdx2 = 1.0 / (grid.dx * grid.dx);
    const double nm1 = n - 1;
    for (int j = 0; j < J; ++j) {
      const double up = u[j + 1 == J ? 0 : j + 1];
      const double um = u[j == 0 ? J - 1 : j - 1];
      const double d1 = (up - um) * inv2dx;
      const double d1sq = d1 * d1;
      const double mu = dt * invdx2 / (1.0 + d1sq);
      diag[j] = 1.0 + 2.0 * mu;
      sub[j] = -mu;
      sup[j] = -mu;
      b[j] =
          u[j] + dt * (-nm1 / u[j] + (f_nodes[j] / eps) * std::sqrt(1.0 + d1sq));
    }
    cyclic_tridiagonal_solve(sub, diag, sup, sub[0], sup[J - 1], b, out, bb, z,
                             scratch);
    // The sweeps are directional; project back onto the symmetry the exact
    // solve of a symmetric system would have.
    if (f_symmetric && reflection_symmetric(u)) symmetrize(out);
  }

  double dt_caps(const Diagnostics& d, const ProblemSpec& spec) const {
    if (!(d.u_min > 0)) throw SingularState("profile minimum is non-positive");
    double diff_cap = spec.c_diff * grid.dx * grid.dx;
    if (scheme == Scheme::Imex) diff_cap *= 1.0 + d.min_d1sq;
    const double react_cap =
        spec.c_react * d.u_min * d.u_min / std::max(n - 1, 1);
    const double force_cap = spec.c_force * eps * d.u_min / f_max;
    return std::min({spec.dt_max, diff_cap, react_cap, force_cap});
  }
};

}  // namespace

std::vector<double> discrete_rhs(const State& state, const ProblemSpec& spec,
                                 const Grid& grid) {
  std::vector<double> f_nodes = sample_function(spec.f, grid);
  std::vector<double> out(grid.J);
  rhs_and_diagnostics(state.u, f_nodes, spec.n, spec.eps, grid, out);
  return out;
}

void discrete_rhs_into(std::span<const double> u,
                       std::span<const double> f_nodes, int n, double eps,
                       const Grid& grid, std::span<double> out) {
  rhs_and_diagnostics(u, f_nodes, n, eps, grid, out);
}

State step(const State& state, double dt, const ProblemSpec& spec,
           const Grid& grid) {
  if (!(dt > 0)) throw SpecError("step: dt must be positive");
  Stepper stepper(spec, grid);
  stepper.refresh(state.u);
  State out;
  out.t = state.t + dt;
  out.u.resize(state.u.size());
  stepper.advance(state.u, dt, out.u);
  return out;
}

double adaptive_dt(const State& state, const ProblemSpec& spec,
                   const Grid& grid) {
  Stepper stepper(spec, grid);
  const Diagnostics d = stepper.refresh(state.u);
  return stepper.dt_caps(d, spec);
}

RunRecord run_until_event(const ProblemSpec& raw_spec,
                          const StepObserver& observer) {
  ProblemSpec spec = raw_spec;
  finalize_spec(spec);

  const auto t_begin = std::chrono::steady_clock::now();
  const Grid grid = build_grid(spec.J);
  Stepper stepper(spec, grid);

  RunRecord rec;
  rec.spec = spec;

  State s;
  s.t = 0;
  {
    const std::vector<double> g_nodes = sample_function(spec.g, grid);
    const double scale = std::pow(spec.eps, spec.alpha);
    s.u.resize(g_nodes.size());
    for (std::size_t j = 0; j < g_nodes.size(); ++j)
      s.u[j] = scale * g_nodes[j];
  }

  std::vector<double> u_next(s.u.size());
  long sample_index = 0;

  auto record_sample = [&](const Diagnostics& d) {
    Sample row;
    row.t = s.t;
    row.u_min = d.u_min;
    row.x_argmin = grid.node(d.argmin);
    row.u_max = d.u_max;
    row.ux_max = d.ux_max;
    row.eps_ut_max = spec.eps * d.rhs_max;
    rec.series.push_back(row);
    if (sample_index % spec.snapshot_stride == 0)
      rec.snapshots.push_back({s.t, s.u});
    ++sample_index;
    if (observer.on_sample) observer.on_sample(s, stepper.rhs, row);
  };

  Diagnostics d = stepper.refresh(s.u);
  record_sample(d);

  bool done = false;
  while (!done) {
    if (d.u_min <= spec.theta_q) {
      rec.verdict = Verdict::Quenched;
      break;
    }
    if (s.t >= spec.t_max) {
      rec.verdict = Verdict::SurvivedToHorizon;
      break;
    }

    double dt = stepper.dt_caps(d, spec);
    const double remaining = spec.t_max - s.t;
    const bool lands_on_horizon = dt >= remaining;
    if (lands_on_horizon) dt = remaining;

    stepper.advance(s.u, dt, u_next);

    bool finite = true;
    int bad_node = -1;
    for (std::size_t j = 0; j < u_next.size(); ++j) {
      if (!std::isfinite(u_next[j])) {
        finite = false;
        bad_node = static_cast<int>(j);
        break;
      }
    }
    if (!finite) {
      rec.verdict = Verdict::Aborted;
      rec.abort_reason = "non-finite value at node " +
                         std::to_string(bad_node) + " after step " +
                         std::to_string(rec.step_count) + " (t=" +
                         std::to_string(s.t) + ", dt=" + std::to_string(dt) +
                         ")";
      if (rec.series.empty() || rec.series.back().t != s.t) record_sample(d);
      break;
    }

    s.u.swap(u_next);
    s.t = lands_on_horizon ? spec.t_max : s.t + dt;
    ++rec.step_count;

    bool singular = false;
    try {
      d = stepper.refresh(s.u);
    } catch (const SingularState&) {
      // overshot below zero inside one step; treat as a quench hit
      singular = true;
    }
    if (singular) {
      rec.verdict = Verdict::Quenched;
      Sample row;
      row.t = s.t;
      row.u_min = *std::min_element(s.u.begin(), s.u.end());
      row.x_argmin = grid.node(static_cast<int>(
          std::min_element(s.u.begin(), s.u.end()) - s.u.begin()));
      row.u_max = *std::max_element(s.u.begin(), s.u.end());
      rec.series.push_back(row);
      done = true;
      break;
    }

    if (rec.step_count % spec.sample_every == 0 ||
        d.u_min <= spec.theta_q || s.t >= spec.t_max) {
      record_sample(d);
    }
  }

  rec.t_stop = s.t;
  if (rec.snapshots.empty() || rec.snapshots.back().t != s.t)
    rec.snapshots.push_back({s.t, s.u});

  if (rec.verdict == Verdict::Quenched && spec.n >= 2) {
    double residual = 0;
    rec.t_star_estimate = extrapolate_quench_time(rec, spec, &residual);
    rec.fit_residual = residual;
    rec.arcs = quench_locations(rec, grid);
    for (const QuenchArc& arc : rec.arcs)
      rec.quench_locations.push_back(arc.x_min);
  }

  rec.wall_time = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t_begin)
                      .count();
  return rec;
}

double extrapolate_quench_time(const RunRecord& record,
                               const ProblemSpec& spec,
                               double* fit_residual_out) {
  if (record.verdict != Verdict::Quenched)
    throw NotQuenched("quench-time extrapolation requires a quenched run");
  if (spec.n < 2)
    throw DegenerateDimension(
        "quench-time extrapolation needs n >= 2 (no singular term when n=1)");
  if (record.series.empty()) throw Error("record has no samples");

  const double nm1 = spec.n - 1;
  const double u_end = record.series.back().u_min;
  const double t_stop = record.series.back().t;
  const double t_star = t_stop + u_end * u_end / (2.0 * nm1);

  if (fit_residual_out) {
    // least-squares fit of u_min^2 ~ p + q t over the trailing samples;
    // under the sqrt law the points are collinear and the residual vanishes
    const double window_cap = std::max(3.0 * spec.theta_q, 2.0 * u_end);
    std::size_t first = record.series.size();
    while (first > 0 && record.series[first - 1].u_min <= window_cap &&
           record.series.size() - first < 400)
      --first;
    const std::size_t count = record.series.size() - first;
    if (count >= 3) {
      double st = 0, sz = 0, stt = 0, stz = 0;
      for (std::size_t k = first; k < record.series.size(); ++k) {
        const double t = record.series[k].t;
        const double z = record.series[k].u_min * record.series[k].u_min;
        st += t;
        sz += z;
        stt += t * t;
        stz += t * z;
      }
      const double m = static_cast<double>(count);
      const double denom = m * stt - st * st;
      if (std::abs(denom) > 0) {
        const double q = (m * stz - st * sz) / denom;
        const double p = (sz - q * st) / m;
        double ss = 0, zmax = 0;
        for (std::size_t k = first; k < record.series.size(); ++k) {
          const double t = record.series[k].t;
          const double z = record.series[k].u_min * record.series[k].u_min;
          const double e = z - (p + q * t);
          ss += e * e;
          zmax = std::max(zmax, std::abs(z));
        }
        *fit_residual_out =
            zmax > 0 ? std::sqrt(ss / m) / zmax : std::sqrt(ss / m);
      } else {
        *fit_residual_out = 0;
      }
    } else {
      *fit_residual_out = 0;
    }
  }
  return t_star;
}

std::vector<QuenchArc> quench_locations(const RunRecord& record,
                                        const Grid& grid) {
  if (record.verdict != Verdict::Quenched)
    throw NotQuenched("quench locations require a quenched run");
  if (record.snapshots.empty()) throw Error("record has no snapshots");

  const std::vector<double>& u = record.snapshots.back().u;
  const int J = grid.J;
  const double cut = 2.0 * record.spec.theta_q;

  std::vector<char> flagged(J);
  int flagged_count = 0;
  for (int j = 0; j < J; ++j) {
    flagged[j] = u[j] <= cut;
    flagged_count += flagged[j];
  }

  std::vector<QuenchArc> arcs;
  if (flagged_count == 0) return arcs;

  if (flagged_count == J) {
    QuenchArc arc;
    arc.begin_node = 0;
    arc.length = J;
    arc.whole_circle = true;
    int argmin = 0;
    for (int j = 1; j < J; ++j)
      if (u[j] < u[argmin]) argmin = j;
    arc.x_min = grid.node(argmin);
    arc.u_min = u[argmin];
    arcs.push_back(arc);
    return arcs;
  }

  // walk the circle starting just past an unflagged node so no arc is split
  int start = 0;
  while (flagged[start]) ++start;
  int j = 0;
  while (j < J) {
    const int idx = grid.wrap(start + j);
    if (!flagged[idx]) {
      ++j;
      continue;
    }
    QuenchArc arc;
    arc.begin_node = idx;
    int argmin = idx;
    int len = 0;
    while (j < J && flagged[grid.wrap(start + j)]) {
      const int k = grid.wrap(start + j);
      if (u[k] < u[argmin]) argmin = k;
      ++len;
      ++j;
    }
    arc.length = len;
    arc.x_min = grid.node(argmin);
    arc.u_min = u[argmin];
    arcs.push_back(arc);
  }
  std::sort(arcs.begin(), arcs.end(),
            [](const QuenchArc& a, const QuenchArc& b) {
              return a.x_min < b.x_min;
            });
  return arcs;
}

}  // namespace quenchflow
