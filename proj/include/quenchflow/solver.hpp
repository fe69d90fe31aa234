#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quenchflow/model.hpp"

namespace quenchflow {

enum class Verdict { Quenched, SurvivedToHorizon, Aborted };

std::string verdict_name(Verdict v);
Verdict verdict_from_name(const std::string& name);

// One row of the diagnostic time series.
struct Sample {
  double t = 0;
  double u_min = 0;
  double x_argmin = 0;
  double u_max = 0;
  double ux_max = 0;      // max_j |centered gradient|
  double eps_ut_max = 0;  // eps * max_j |rhs| (velocity proxy)
};

struct Snapshot {
  double t = 0;
  std::vector<double> u;
};

// Contiguous run of nodes (mod J) where the final profile sits at or below
// twice the quench threshold.
struct QuenchArc {
  int begin_node = 0;
  int length = 0;
  double x_min = 0;  // position of the arc's minimizing node, in [0,1)
  double u_min = 0;
  bool whole_circle = false;
};

struct RunRecord {
  ProblemSpec spec;
  std::vector<Sample> series;
  std::vector<Snapshot> snapshots;
  Verdict verdict = Verdict::Aborted;
  double t_stop = 0;
  std::optional<double> t_star_estimate;
  double fit_residual = 0;  // error indicator from the sqrt-law fit
  std::vector<QuenchArc> arcs;
  std::vector<double> quench_locations;  // minimizing node of each arc
  long step_count = 0;
  double wall_time = 0;
  std::string abort_reason;
};

// Semi-discrete right-hand side with centered differences and periodic
// indices:
//   R_j = D2_j/(1+D1_j^2) - (n-1)/u_j + (f_j/eps) sqrt(1+D1_j^2).
// Throws SingularState when min u <= 0. The low-level overload takes
// presampled forcing values and writes into out.
std::vector<double> discrete_rhs(const State& state, const ProblemSpec& spec,
                                 const Grid& grid);
void discrete_rhs_into(std::span<const double> u,
                       std::span<const double> f_nodes, int n, double eps,
                       const Grid& grid, std::span<double> out);

// One time step. explicit-monotone: forward Euler on discrete_rhs. imex:
// diffusion with the coefficient 1/(1+D1^2) frozen at the old step solved
// implicitly (cyclic tridiagonal system), reaction and forcing explicit.
// Either scheme maps reflection-symmetric data to reflection-symmetric data.
State step(const State& state, double dt, const ProblemSpec& spec,
           const Grid& grid);

// dt = min(dt_max, diffusion cap, c_react*(min u)^2/max(n-1,1),
//          c_force*eps*(min u)/max f). The diffusion cap is c_diff*dx^2 for
// the monotone scheme and c_diff*dx^2*(1+min_j D1_j^2) for imex.
double adaptive_dt(const State& state, const ProblemSpec& spec,
                   const Grid& grid);

// Callbacks into a running evolution. on_sample fires for every recorded
// diagnostic row (cadence spec.sample_every) with the current state and the
// current right-hand side.
struct StepObserver {
  std::function<void(const State&, std::span<const double> rhs,
                     const Sample&)>
      on_sample;
};

// Evolves u(x,0) = eps^alpha g(x) until min u <= theta_q (Quenched), t
// reaches t_max (SurvivedToHorizon), or a value goes non-finite (Aborted).
// Quenched records gain a quench-time extrapolation and threshold arcs.
RunRecord run_until_event(const ProblemSpec& spec,
                          const StepObserver& observer = {});

// T* ~ t_stop + u_min(t_stop)^2 / (2(n-1)), the dominant balance of the
// singular term near the pinch. Also fits the sqrt law against the trailing
// samples; the relative fit residual lands in fit_residual_out when given.
double extrapolate_quench_time(const RunRecord& record,
                               const ProblemSpec& spec,
                               double* fit_residual_out = nullptr);

// Threshold arcs of the final profile (u <= 2*theta_q), clustered into
// circular runs.
std::vector<QuenchArc> quench_locations(const RunRecord& record,
                                        const Grid& grid);

}  // namespace quenchflow
