#include "quenchflow/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "quenchflow/records.hpp"

namespace quenchflow {

std::string axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::Eps:
      return "eps";
    case SweepAxis::Alpha:
      return "alpha";
    default:
      return "resolution";
  }
}

SweepAxis axis_from_name(const std::string& name) {
  if (name == "eps") return SweepAxis::Eps;
  if (name == "alpha") return SweepAxis::Alpha;
  if (name == "resolution") return SweepAxis::Resolution;
  throw SpecError("unknown sweep axis '" + name + "'");
}

// ---------------------------------------------------------------------------
// certificates

std::string BarrierCertificate::tag() const {
  std::string t = is_super ? "super" : "sub";
  return t + (pass ? "-ok" : "-failed");
}

BarrierCertificate certify_with_constant_barrier(const RunRecord& record,
                                                 bool use_super) {
  BarrierCertificate cert;
  cert.is_super = use_super;

  const ProblemSpec& spec = record.spec;
  if (spec.sample_every != 1) {
    cert.note = "series cadence is not every step; cannot walk the barrier";
    return cert;
  }
  if (record.series.size() < 2) {
    cert.note = "series too short";
    return cert;
  }

  const Grid grid = build_grid(spec.J);
  const std::vector<double> f_nodes = sample_function(spec.f, grid);
  const std::vector<double> g_nodes = sample_function(spec.g, grid);
  cert.a = use_super ? *std::max_element(f_nodes.begin(), f_nodes.end())
                     : *std::min_element(f_nodes.begin(), f_nodes.end());
  cert.b = use_super ? *std::max_element(g_nodes.begin(), g_nodes.end())
                     : *std::min_element(g_nodes.begin(), g_nodes.end());

  OdeSpec ode{spec.n, cert.a, spec.eps, spec.alpha,
              std::pow(spec.eps, spec.alpha) * cert.b};
  cert.ode_closed_quench_time = ode_quench_time(ode);

  // walk the barrier through the recorded time grid with the same first
  // order update the scheme uses, and track the worst ordering margin
  const double nm1 = spec.n - 1;
  double y = ode.y0;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0;; ++k) {
    const Sample& s = record.series[k];
    const double margin = use_super ? (y - s.u_max) / (1 + std::abs(y))
                                    : (s.u_min - y) / (1 + std::abs(y));
    worst = std::min(worst, margin);
    if (k + 1 == record.series.size()) break;
    const double dt = record.series[k + 1].t - s.t;
    y += dt * (-nm1 / y + cert.a / spec.eps);
    if (!(y > 0)) {
      cert.barrier_quench_time = record.series[k + 1].t;
      break;
    }
  }
  cert.worst_margin = worst;

  constexpr double kTol = 1e-8;
  if (use_super) {
    // quench certificate: the run must sit below a barrier that provably
    // reaches zero in finite time
    cert.pass = record.verdict == Verdict::Quenched && worst >= -kTol &&
                cert.ode_closed_quench_time.has_value();
    if (!cert.ode_closed_quench_time)
      cert.note = "constant supersolution does not quench";
  } else {
    // survival certificate: the run must dominate a barrier that never
    // reaches zero
    const bool barrier_alive =
        !cert.barrier_quench_time && !cert.ode_closed_quench_time;
    cert.pass = record.verdict == Verdict::SurvivedToHorizon &&
                worst >= -kTol && barrier_alive;
    if (!barrier_alive) cert.note = "constant subsolution quenches";
  }
  if (!cert.pass && cert.note.empty())
    cert.note = "ordering margin " + format_double(worst);
  return cert;
}

// ---------------------------------------------------------------------------
// sweeps

namespace {

ProblemSpec row_spec(const SweepPlan& plan, double value) {
  ProblemSpec spec = plan.base;
  switch (plan.axis) {
    case SweepAxis::Eps:
      spec.eps = value;
      break;
    case SweepAxis::Alpha:
      spec.alpha = value;
      break;
    case SweepAxis::Resolution:
      spec.J = static_cast<int>(value);
      break;
  }
  if (plan.horizon) spec.t_max = *plan.horizon;
  spec.sample_every = 1;  // certificates walk every step
  finalize_spec(spec);
  return spec;
}

bool specs_match(const ProblemSpec& a, const ProblemSpec& b) {
  return a.n == b.n && a.f_src == b.f_src && a.g_src == b.g_src &&
         a.eps == b.eps && a.alpha == b.alpha && a.J == b.J &&
         a.t_max == b.t_max && a.theta_q == b.theta_q &&
         a.scheme == b.scheme && a.dt_max == b.dt_max;
}

std::string row_stem_name(std::size_t index, double value) {
  std::ostringstream os;
  os << "row_" << index << "_" << format_double(value);
  return os.str();
}

void check_sorted(const std::vector<double>& values) {
  if (values.empty()) throw SpecError("sweep values must be nonempty");
  bool asc = true, desc = true;
  for (std::size_t i = 1; i < values.size(); ++i) {
    asc &= values[i] > values[i - 1];
    desc &= values[i] < values[i - 1];
  }
  if (!asc && !desc)
    throw SpecError("sweep values must be strictly sorted");
}

}  // namespace

RegimeTable run_sweep(const SweepPlan& plan) {
  check_sorted(plan.values);
  RegimeTable table;

  for (std::size_t i = 0; i < plan.values.size(); ++i) {
    const double value = plan.values[i];
    RegimeRow row;
    row.param = value;

    ProblemSpec spec;
    try {
      spec = row_spec(plan, value);
    } catch (const Error& e) {
      row.verdict = Verdict::Aborted;
      row.certificate = std::string("invalid-spec: ") + e.what();
      table.rows.push_back(row);
      continue;
    }

    RunRecord rec;
    bool have = false;
    std::filesystem::path stem;
    if (!plan.out_dir.empty()) {
      stem = plan.out_dir / row_stem_name(i, value);
      try {
        rec = load_run_record(stem);
        have = specs_match(rec.spec, spec);
      } catch (const CorruptRecord&) {
        have = false;
      }
    }
    if (!have) {
      try {
        rec = run_until_event(spec);
      } catch (const Error& e) {
        row.verdict = Verdict::Aborted;
        row.certificate = std::string("run-error: ") + e.what();
        table.rows.push_back(row);
        continue;
      }
      if (!plan.out_dir.empty()) save_run_record(rec, stem);
    }

    row.verdict = rec.verdict;
    row.t_stop = rec.t_stop;
    row.t_star = rec.t_star_estimate;

    const double norm =
        std::pow(spec.eps, std::min(spec.alpha, 1.0));
    double floor = std::numeric_limits<double>::infinity();
    for (const Sample& s : rec.series) floor = std::min(floor, s.u_min);
    row.floor = floor / norm;

    if (rec.verdict == Verdict::Aborted) {
      row.certificate = "uncertified";
    } else {
      const bool super = rec.verdict == Verdict::Quenched;
      const BarrierCertificate cert =
          certify_with_constant_barrier(rec, super);
      row.certificate = cert.pass ? cert.tag() : "uncertified(" +
                                                     cert.tag() + ")";
    }
    table.rows.push_back(row);
  }

  if (!plan.out_dir.empty())
    save_regime_table(table, plan.out_dir / "table.csv");
  return table;
}

void save_regime_table(const RegimeTable& table,
                       const std::filesystem::path& path) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "param,verdict,t_stop,T_star,floor,certificate\n";
  for (const RegimeRow& r : table.rows) {
    out << format_double(r.param) << ',' << verdict_name(r.verdict) << ','
        << format_double(r.t_stop) << ','
        << (r.t_star ? format_double(*r.t_star) : std::string()) << ','
        << format_double(r.floor) << ',' << r.certificate << '\n';
  }
}

RegimeTable load_regime_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw CorruptRecord(path.string(), "missing table " + path.string());
  std::string line;
  if (!std::getline(in, line) ||
      line != "param,verdict,t_stop,T_star,floor,certificate")
    throw CorruptRecord(path.string(), "bad table header in " + path.string());
  RegimeTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cells[6];
    for (int i = 0; i < 5; ++i) {
      if (!std::getline(ls, cells[i], ','))
        throw CorruptRecord(path.string(),
                            "truncated table row in " + path.string());
    }
    std::getline(ls, cells[5]);
    RegimeRow row;
    try {
      row.param = parse_double(cells[0]);
      row.verdict = verdict_from_name(cells[1]);
      row.t_stop = parse_double(cells[2]);
      if (!cells[3].empty()) row.t_star = parse_double(cells[3]);
      row.floor = parse_double(cells[4]);
    } catch (const Error& e) {
      throw CorruptRecord(path.string(), path.string() + ": " + e.what());
    }
    row.certificate = cells[5];
    table.rows.push_back(row);
  }
  return table;
}

// ---------------------------------------------------------------------------
// limit convergence study

namespace {

void check_limit_hypothesis(const ProblemSpec& spec) {
  constexpr int kDense = 10000;
  double worst = -std::numeric_limits<double>::infinity();
  double worst_x = 0;
  for (int i = 0; i < kDense; ++i) {
    const double x = i / static_cast<double>(kDense);
    const double v = spec.f.eval(x) * spec.g.eval(x);
    if (v > worst) {
      worst = v;
      worst_x = x;
    }
  }
  if (!(worst < spec.n - 1))
    throw HypothesisViolated("max f g = " + format_double(worst) + " at x = " +
                             format_double(worst_x) +
                             " is not below n-1 = " +
                             format_double(spec.n - 1));
}

}  // namespace

LimitStudyResult limit_convergence_study(const ProblemSpec& base,
                                         const std::vector<double>& eps_list,
                                         const LimitStudyOptions& options) {
  if (eps_list.empty()) throw SpecError("eps list must be nonempty");
  if (!options.override_hypothesis) check_limit_hypothesis(base);

  const Grid grid = build_grid(base.J);
  const std::vector<double> f_nodes = sample_function(base.f, grid);
  const std::vector<double> g_nodes = sample_function(base.g, grid);

  // earliest nodewise quench of the limit problem fixes the shared lattice
  double t_hat = std::numeric_limits<double>::infinity();
  for (int j = 0; j < grid.J; ++j) {
    OdeSpec node{base.n, f_nodes[j], 1.0, 1.0, g_nodes[j]};
    if (const auto tq = ode_quench_time(node)) t_hat = std::min(t_hat, *tq);
  }
  if (!std::isfinite(t_hat))
    throw HypothesisViolated("no node of the limit problem quenches");

  LimitStudyResult result;
  result.limit_quench_min = t_hat;
  const int M = std::max(1, options.lattice_count);
  for (int m = 1; m <= M; ++m)
    result.lattice_times.push_back(options.lattice_fraction * t_hat * m / M);

  std::vector<LimitProfile> limits;
  limits.reserve(result.lattice_times.size());
  for (double tau : result.lattice_times)
    limits.push_back(limit_profile(base.f, base.g, base.n, grid, tau));

  for (double eps : eps_list) {
    ProblemSpec spec = base;
    spec.eps = eps;
    spec.alpha = 1.0;
    spec.t_max = -1;
    spec.theta_q = -1;
    spec.sample_every = 1;
    spec.dt_max = std::min(base.dt_max, options.w_dt_max * eps * eps);
    finalize_spec(spec);

    // capture the profile at each rescaled lattice time while running
    std::vector<std::vector<double>> captured(result.lattice_times.size());
    std::vector<double> targets;
    for (double tau : result.lattice_times)
      targets.push_back(eps * eps * tau);

    State prev;
    std::size_t next = 0;
    StepObserver obs;
    obs.on_sample = [&](const State& s, std::span<const double>,
                        const Sample&) {
      while (next < targets.size() && s.t >= targets[next]) {
        std::vector<double>& out = captured[next];
        out.resize(s.u.size());
        if (s.t == targets[next] || prev.u.empty()) {
          out.assign(s.u.begin(), s.u.end());
        } else {
          const double w =
              (targets[next] - prev.t) / (s.t - prev.t);
          for (std::size_t j = 0; j < s.u.size(); ++j)
            out[j] = (1 - w) * prev.u[j] + w * s.u[j];
        }
        ++next;
      }
      prev = s;
    };

    const RunRecord rec = run_until_event(spec, obs);
    if (next < targets.size())
      throw Error("run at eps = " + format_double(eps) +
                  " ended before the evaluation lattice (t_stop = " +
                  format_double(rec.t_stop) + ")");

    LimitStudyRow row;
    row.eps = eps;
    double sup = 0;
    for (std::size_t m = 0; m < captured.size(); ++m) {
      for (int j = 0; j < grid.J; ++j) {
        if (limits[m].quenched[j]) continue;
        sup = std::max(sup,
                       std::abs(captured[m][j] / eps - limits[m].w[j]));
      }
    }
    row.sup_error = sup;
    row.t_star_rescaled =
        rec.t_star_estimate ? *rec.t_star_estimate / (eps * eps) : 0;
    result.rows.push_back(row);
  }
  return result;
}

void save_limit_table(const LimitStudyResult& result,
                      const std::filesystem::path& path) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "eps,sup_error,t_star_rescaled\n";
  for (const LimitStudyRow& r : result.rows)
    out << format_double(r.eps) << ',' << format_double(r.sup_error) << ','
        << format_double(r.t_star_rescaled) << '\n';
}

// ---------------------------------------------------------------------------
// quench location study

LocationReport quench_location_study(const ProblemSpec& base,
                                     const LocationStudyOptions& options) {
  const AssumptionReport assumptions =
      validate_assumptions(base.f, base.g, 10000, 1e-9);
  if (!assumptions.a1_pass())
    throw HypothesisViolated("standing assumptions fail: " +
                             assumptions.worst_check);
  if (!assumptions.a2_pass())
    throw HypothesisViolated("symmetry assumptions fail: " +
                             assumptions.worst_check);

  // max f * max g < n-1 guarantees the quench
  double f_max = -std::numeric_limits<double>::infinity();
  double g_max = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10000; ++i) {
    const double x = i / 10000.0;
    f_max = std::max(f_max, base.f.eval(x));
    g_max = std::max(g_max, base.g.eval(x));
  }
  if (!(f_max * g_max < base.n - 1))
    throw HypothesisViolated("max f * max g = " + format_double(f_max * g_max) +
                             " is not below n-1");

  ProblemSpec spec = base;
  spec.sample_every = 1;
  spec.snapshot_stride = 16;
  finalize_spec(spec);
  const Grid grid = build_grid(spec.J);

  LocationReport rep;

  // online monitors: gradient sign on the left half, symmetry defect, and
  // the profile height at x = 1/2
  double ux_min_left = std::numeric_limits<double>::infinity();
  double sym_err = 0;
  std::vector<double> half_t, half_u;
  const int J = spec.J;
  StepObserver obs;
  obs.on_sample = [&](const State& s, std::span<const double>,
                      const Sample&) {
    const double inv2dx = 0.5 * J;
    for (int j = 0; j <= J / 2; ++j) {
      const double d1 =
          (s.u[(j + 1) % J] - s.u[(j + J - 1) % J]) * inv2dx;
      ux_min_left = std::min(ux_min_left, d1);
    }
    for (int j = 1; j < J / 2; ++j)
      sym_err = std::max(sym_err, std::abs(s.u[j] - s.u[J - j]));
    half_t.push_back(s.t);
    half_u.push_back(s.u[J / 2]);
  };

  rep.record = run_until_event(spec, obs);
  if (rep.record.verdict != Verdict::Quenched)
    throw Error("location study run did not quench (verdict " +
                verdict_name(rep.record.verdict) + ")");

  rep.locations = rep.record.quench_locations;
  rep.ux_min_left_half = ux_min_left;
  rep.gradient_sign_ok = ux_min_left >= -options.ux_tol;
  rep.symmetry_error = sym_err;

  // threshold arc shape
  rep.arc_contains_zero = false;
  rep.arc_clears_middle = true;
  for (const QuenchArc& arc : rep.record.arcs) {
    for (int k = 0; k < arc.length; ++k) {
      const int node = grid.wrap(arc.begin_node + k);
      const double x = grid.node(node);
      if (node == 0) rep.arc_contains_zero = true;
      if (x >= options.a_star && x <= 1.0 - options.a_star)
        rep.arc_clears_middle = false;
    }
  }

  // sine barrier fitted at t0 = t_stop / 2
  rep.t0 = rep.record.t_stop / 2;
  const Snapshot* at_t0 = nullptr;
  for (const Snapshot& s : rep.record.snapshots) {
    if (!at_t0 || std::abs(s.t - rep.t0) < std::abs(at_t0->t - rep.t0))
      at_t0 = &s;
  }
  if (at_t0 == nullptr) throw Error("run kept no snapshots");

  auto gradient_at = [&](const std::vector<double>& u, int j) {
    return (u[grid.wrap(j + 1)] - u[grid.wrap(j - 1)]) * 0.5 * J;
  };

  double c0 = std::numeric_limits<double>::infinity();
  for (int j = 0; j < J; ++j) {
    const double x = grid.node(j);
    if (x <= options.bar_a || x >= options.bar_b) continue;
    c0 = std::min(c0, gradient_at(at_t0->u, j));
  }
  if (!(c0 > 0))
    throw Error("gradient floor at t0 is not positive: " + format_double(c0));
  rep.c0 = std::min(c0, options.c0_cap);

  const BarrierFn sine = sine_gradient_subsolution(
      rep.c0, options.bar_a, options.bar_b, f_max, options.margin);
  rep.barrier_m = sine.constant("M");

  // the certified floor for u(1/2,.) after t0: the barrier's integral over
  // [bar_a, a_star], discounted over half the estimated quench time
  const double L = options.bar_b - options.bar_a;
  const double pi = std::numbers::pi;
  const double integral =
      (L / pi) *
      (1.0 - std::cos(pi * (options.a_star - options.bar_a) / L));
  const double t_star =
      rep.record.t_star_estimate ? *rep.record.t_star_estimate
                                 : rep.record.t_stop;
  rep.alpha_bound = rep.c0 * std::exp(-rep.barrier_m * t_star / 2) * integral;

  double half_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < half_t.size(); ++k)
    if (half_t[k] >= rep.t0) half_min = std::min(half_min, half_u[k]);
  rep.u_half_min_window = half_min;
  rep.u_half_above_bound = half_min >= rep.alpha_bound;

  // ordering and residual-bracket checks against recorded gradients on
  // [bar_a, bar_b] x [t0, t_stop]
  const std::vector<double> f_nodes = sample_function(spec.f, grid);
  double worst_gap = std::numeric_limits<double>::infinity();
  double worst_bracket = -std::numeric_limits<double>::infinity();
  for (const Snapshot& snap : rep.record.snapshots) {
    if (snap.t < rep.t0) continue;
    const double tau = snap.t - rep.t0;
    for (int j = 0; j < J; ++j) {
      const double x = grid.node(j);
      if (x < options.bar_a || x > options.bar_b) continue;
      const double ux = gradient_at(snap.u, j);
      worst_gap = std::min(worst_gap, ux - sine.value(x, tau));
      if (x > options.bar_a && x < options.bar_b)
        worst_bracket = std::max(
            worst_bracket, sine_bracket(sine, f_nodes[j], ux, x, tau));
    }
  }
  rep.worst_barrier_gap = worst_gap;
  rep.barrier_ordering_ok = worst_gap >= -1e-6;
  rep.worst_bracket = worst_bracket;
  rep.bracket_sign_ok = worst_bracket <= 0;

  rep.pass = rep.arc_contains_zero && rep.arc_clears_middle &&
             rep.gradient_sign_ok && rep.u_half_above_bound &&
             rep.symmetry_error <= 1e-12 && rep.barrier_ordering_ok &&
             rep.bracket_sign_ok;
  return rep;
}

// ---------------------------------------------------------------------------
// comparison battery

namespace {

// deterministic uniforms independent of the standard library's
// distribution implementations
struct Uniform {
  std::mt19937 gen;
  explicit Uniform(unsigned seed) : gen(seed) {}
  double next() {  // [0, 1)
    const std::uint64_t hi = gen() >> 5, lo = gen() >> 6;
    return (hi * 67108864.0 + lo) * (1.0 / 9007199254740992.0);
  }
  double range(double lo, double hi) { return lo + (hi - lo) * next(); }
};

// 4-mode cosine/sine series with coefficients bounded so min >= floor
struct RandomSeries {
  double c0;
  double a[4], b[4];

  double operator()(double x) const {
    double v = c0;
    for (int m = 0; m < 4; ++m) {
      const double w = 2 * std::numbers::pi * (m + 1) * x;
      v += a[m] * std::cos(w) + b[m] * std::sin(w);
    }
    return v;
  }
};

RandomSeries random_series(Uniform& rng, double base_lo, double base_hi,
                           double floor) {
  RandomSeries s;
  s.c0 = rng.range(base_lo, base_hi);
  const double budget = s.c0 - floor;
  double weights[8], total = 0;
  for (double& w : weights) {
    w = rng.next();
    total += w;
  }
  const double scale = budget / std::max(total, 1e-12);
  for (int m = 0; m < 4; ++m) {
    s.a[m] = (rng.next() < 0.5 ? -1 : 1) * weights[m] * scale * rng.next();
    s.b[m] = (rng.next() < 0.5 ? -1 : 1) * weights[4 + m] * scale * rng.next();
  }
  return s;
}

}  // namespace

BatterySummary comparison_battery(int count, unsigned seed) {
  if (count < 1) throw SpecError("battery count must be >= 1");

  BatterySummary summary;
  summary.count = count;
  Uniform rng(seed);

  const int J = 64;
  const Grid grid = build_grid(J);
  const int n = 2;
  const double eps = 1.0;
  const double theta = 0.05;
  const double t_horizon = 0.02;

  ProblemSpec caps;  // reuse the documented step caps
  caps.n = n;
  caps.eps = eps;

  std::vector<double> f_nodes(J), u1(J), u2(J), r1(J), r2(J), n1(J), n2(J);

  for (int pair = 0; pair < count; ++pair) {
    const RandomSeries f_series = random_series(rng, 0.4, 1.0, 0.2);
    const RandomSeries g_series = random_series(rng, 0.6, 1.2, 0.25);
    const RandomSeries gap_series = random_series(rng, 0.05, 0.25, 0.0);

    for (int j = 0; j < J; ++j) {
      const double x = grid.node(j);
      f_nodes[j] = f_series(x);
      u1[j] = g_series(x);
      u2[j] = u1[j] + gap_series(x);
    }
    const double f_max = *std::max_element(f_nodes.begin(), f_nodes.end());

    bool ok = true;
    double t = 0;
    long step_idx = 0;
    while (t < t_horizon) {
      const double m1 = *std::min_element(u1.begin(), u1.end());
      const double m2 = *std::min_element(u2.begin(), u2.end());
      if (m1 <= theta || m2 <= theta) break;  // one of the pair quenched

      const double m = std::min(m1, m2);
      const double dt =
          std::min({caps.dt_max, caps.c_diff * grid.dx * grid.dx,
                    caps.c_react * m * m / (n - 1),
                    caps.c_force * eps * m / f_max, t_horizon - t});

      discrete_rhs_into(u1, f_nodes, n, eps, grid, r1);
      discrete_rhs_into(u2, f_nodes, n, eps, grid, r2);
      for (int j = 0; j < J; ++j) {
        n1[j] = u1[j] + dt * r1[j];
        n2[j] = u2[j] + dt * r2[j];
      }
      u1.swap(n1);
      u2.swap(n2);
      t += dt;
      ++step_idx;

      for (int j = 0; j < J; ++j) {
        if (u1[j] > u2[j] + 1e-12) {
          ok = false;
          if (!summary.first_failure)
            summary.first_failure =
                BatteryFailure{pair, step_idx, j, u1[j] - u2[j]};
          break;
        }
      }
      if (!ok) break;
    }
    if (ok) ++summary.passed;
  }
  return summary;
}

}  // namespace quenchflow
