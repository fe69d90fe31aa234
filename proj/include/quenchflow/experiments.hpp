#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "quenchflow/barriers.hpp"
#include "quenchflow/ode.hpp"
#include "quenchflow/solver.hpp"

namespace quenchflow {

enum class SweepAxis { Eps, Alpha, Resolution };

std::string axis_name(SweepAxis a);
SweepAxis axis_from_name(const std::string& name);

struct SweepPlan {
  ProblemSpec base;
  SweepAxis axis = SweepAxis::Eps;
  std::vector<double> values;          // nonempty, strictly sorted
  std::optional<double> horizon;       // per-run t_max override
  std::filesystem::path out_dir;       // empty: nothing persisted
};

// Ordering check of a run against the spatially constant barrier evolved
// through the same recorded time steps (the discrete analogue of the
// comparison argument). Verdict-appropriate: a supersolution certifies a
// quench, a subsolution certifies survival.
struct BarrierCertificate {
  bool is_super = false;
  double a = 0, b = 0;                 // barrier forcing and initial size
  double worst_margin = 0;             // min over time of the signed margin,
                                       // normalized by 1 + |barrier|
  std::optional<double> barrier_quench_time;  // discrete walk hit zero here
  std::optional<double> ode_closed_quench_time;
  bool pass = false;
  std::string note;

  std::string tag() const;  // short CSV token
};

BarrierCertificate certify_with_constant_barrier(const RunRecord& record,
                                                 bool use_super);

struct RegimeRow {
  double param = 0;
  Verdict verdict = Verdict::Aborted;
  double t_stop = 0;
  std::optional<double> t_star;
  double floor = 0;  // min over the run of u_min / eps^min(alpha,1)
  std::string certificate;
};

struct RegimeTable {
  std::vector<RegimeRow> rows;
};

// Runs every plan entry in order, attaching a barrier certificate (or an
// explicit "uncertified" tag) to each verdict. With an output directory,
// rows persist as record pairs and existing valid rows are reused, so a
// half-finished sweep resumes by running only the missing rows. Aborted
// rows are recorded and the sweep continues.
RegimeTable run_sweep(const SweepPlan& plan);

void save_regime_table(const RegimeTable& table,
                       const std::filesystem::path& path);
RegimeTable load_regime_table(const std::filesystem::path& path);

// ---------------------------------------------------------------------------

struct LimitStudyOptions {
  int lattice_count = 9;        // evaluation times on the rescaled axis
  double lattice_fraction = 0.75;  // of the first limit quench time
  double w_dt_max = 1e-4;       // step cap on the rescaled time axis
  bool override_hypothesis = false;
};

struct LimitStudyRow {
  double eps = 0;
  double sup_error = 0;          // over the shared (x, tau) lattice
  double t_star_rescaled = 0;    // T*_eps / eps^2
};

struct LimitStudyResult {
  std::vector<LimitStudyRow> rows;
  double limit_quench_min = 0;   // earliest nodewise limit quench time
  std::vector<double> lattice_times;
};

// For each eps, runs the evolution at alpha = 1, rescales u(x, eps^2 tau)/eps
// onto a shared lattice, and measures the sup distance to the pointwise
// limit profiles. Requires max f g < n-1 on a dense sample grid unless
// overridden.
LimitStudyResult limit_convergence_study(const ProblemSpec& base,
                                         const std::vector<double>& eps_list,
                                         const LimitStudyOptions& options = {});

void save_limit_table(const LimitStudyResult& result,
                      const std::filesystem::path& path);

// ---------------------------------------------------------------------------

struct LocationStudyOptions {
  double a_star = 0.1;     // the arc must avoid [a_star, 1-a_star]
  double bar_a = 0.05;     // sine barrier interval
  double bar_b = 0.45;
  double margin = 1.25;
  double c0_cap = 0.15;    // fitted gradient floor is clamped here
  double ux_tol = 1e-8;    // gradient sign tolerance on [0, 1/2]
};

struct LocationReport {
  RunRecord record;
  std::vector<double> locations;
  bool arc_contains_zero = false;
  bool arc_clears_middle = false;  // no flagged node in [a_star, 1-a_star]
  double ux_min_left_half = 0;     // min over run of min_j<=J/2 gradient
  bool gradient_sign_ok = false;
  double symmetry_error = 0;       // max over run of |u_j - u_{J-j}|
  double t0 = 0;                   // barrier fitting time (t_stop / 2)
  double c0 = 0;                   // clamped gradient floor at t0
  double barrier_m = 0;
  double alpha_bound = 0;          // certified floor for u(1/2, t), t >= t0
  double u_half_min_window = 0;    // observed min of u(1/2, t) on [t0, t_stop]
  bool u_half_above_bound = false;
  double worst_barrier_gap = 0;    // min of u_x - w over the window
  bool barrier_ordering_ok = false;
  double worst_bracket = 0;        // max of the sine residual bracket
  bool bracket_sign_ok = false;
  bool pass = false;
};

// Quench-location study for reflection-symmetric data: runs to quench and
// checks that the threshold arc sits at the integers, the gradient sign on
// [0, 1/2], the sine-barrier floor at x = 1/2, and exact symmetry.
// Requires the standing assumptions plus max f * max g < n-1; throws
// HypothesisViolated otherwise.
LocationReport quench_location_study(const ProblemSpec& spec,
                                     const LocationStudyOptions& options = {});

// ---------------------------------------------------------------------------

struct BatteryFailure {
  int pair_index = 0;
  long step = 0;
  int node = 0;
  double gap = 0;
};

struct BatterySummary {
  int count = 0;
  int passed = 0;
  std::optional<BatteryFailure> first_failure;
};

// Seeded random ordered pairs g1 <= g2 (truncated cosine series shifted
// apart), evolved with the explicit monotone scheme under a shared step
// size; checks nodewise ordering at every step to 1e-12.
BatterySummary comparison_battery(int count, unsigned seed);

}  // namespace quenchflow
