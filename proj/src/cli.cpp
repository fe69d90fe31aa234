#include "quenchflow/cli.hpp"

#include <filesystem>
#include <iostream>

#include "quenchflow/config.hpp"
#include "quenchflow/mesh.hpp"
#include "quenchflow/records.hpp"

namespace quenchflow {

namespace {

void print_run_summary(const RunRecord& rec) {
  std::cout << "verdict: " << verdict_name(rec.verdict) << '\n';
  std::cout << "t_stop:  " << format_double(rec.t_stop) << '\n';
  if (rec.t_star_estimate)
    std::cout << "T*:      " << format_double(*rec.t_star_estimate)
              << " (fit residual " << format_double(rec.fit_residual) << ")\n";
  if (!rec.quench_locations.empty()) {
    std::cout << "quench locations:";
    for (double x : rec.quench_locations) std::cout << ' ' << format_double(x);
    if (!rec.arcs.empty() && rec.arcs.front().whole_circle)
      std::cout << " (whole circle)";
    std::cout << '\n';
  }
  std::cout << "steps:   " << rec.step_count << "  wall: "
            << format_double(rec.wall_time) << " s\n";
  if (!rec.abort_reason.empty())
    std::cout << "abort:   " << rec.abort_reason << '\n';
}

int cmd_validate(const Config& cfg) {
  const Expr f = parse_expr(cfg.f_src);
  const Expr g = parse_expr(cfg.g_src);
  const AssumptionReport rep =
      validate_assumptions(f, g, cfg.assume_samples, cfg.assume_tol);
  std::cout << format_report(rep);
  return rep.a1_pass() ? 0 : 1;
}

int cmd_run(const Config& cfg) {
  ProblemSpec spec = cfg.to_problem_spec();
  const RunRecord rec = run_until_event(spec);
  print_run_summary(rec);
  const std::filesystem::path stem =
      std::filesystem::path(cfg.out_dir) / "run";
  save_run_record(rec, stem);
  std::cout << "wrote " << stem.string() << ".csv and .meta\n";
  return rec.verdict == Verdict::Aborted ? 2 : 0;
}

int cmd_sweep(const Config& cfg) {
  if (cfg.sweep_values.empty())
    throw ConfigError(ConfigError::Kind::MissingKey, 0,
                      "sweep needs 'sweep_values'");
  const SweepPlan plan = cfg.to_sweep_plan();
  const RegimeTable table = run_sweep(plan);
  std::cout << "param,verdict,t_stop,T_star,floor,certificate\n";
  for (const RegimeRow& r : table.rows) {
    std::cout << format_double(r.param) << ',' << verdict_name(r.verdict)
              << ',' << format_double(r.t_stop) << ','
              << (r.t_star ? format_double(*r.t_star) : std::string()) << ','
              << format_double(r.floor) << ',' << r.certificate << '\n';
  }
  std::cout << "wrote " << (plan.out_dir / "table.csv").string() << '\n';
  return 0;
}

int cmd_limit(const Config& cfg) {
  if (cfg.eps_list.empty())
    throw ConfigError(ConfigError::Kind::MissingKey, 0,
                      "limit needs 'eps_list'");
  LimitStudyOptions opt;
  opt.lattice_count = cfg.lattice_points;
  opt.override_hypothesis = cfg.override_hypothesis;
  const LimitStudyResult result =
      limit_convergence_study(cfg.to_problem_spec(), cfg.eps_list, opt);
  std::cout << "first limit quench at t = "
            << format_double(result.limit_quench_min) << '\n';
  std::cout << "eps,sup_error,t_star_rescaled\n";
  for (const LimitStudyRow& r : result.rows)
    std::cout << format_double(r.eps) << ',' << format_double(r.sup_error)
              << ',' << format_double(r.t_star_rescaled) << '\n';
  const std::filesystem::path path =
      std::filesystem::path(cfg.out_dir) / "limit.csv";
  save_limit_table(result, path);
  std::cout << "wrote " << path.string() << '\n';
  return 0;
}

int cmd_locate(const Config& cfg) {
  LocationStudyOptions opt;
  opt.a_star = cfg.a_star;
  opt.bar_a = cfg.barrier_a;
  opt.bar_b = cfg.barrier_b;
  opt.margin = cfg.barrier_margin;
  const LocationReport rep =
      quench_location_study(cfg.to_problem_spec(), opt);
  print_run_summary(rep.record);
  std::cout << "arc contains x=0: " << (rep.arc_contains_zero ? "yes" : "NO")
            << '\n';
  std::cout << "arc clear of [" << format_double(opt.a_star) << ", "
            << format_double(1 - opt.a_star) << "]: "
            << (rep.arc_clears_middle ? "yes" : "NO") << '\n';
  std::cout << "min u_x on [0,1/2]: " << format_double(rep.ux_min_left_half)
            << '\n';
  std::cout << "symmetry defect:    " << format_double(rep.symmetry_error)
            << '\n';
  std::cout << "sine barrier: c0 = " << format_double(rep.c0)
            << ", M = " << format_double(rep.barrier_m)
            << ", floor for u(1/2,.) = " << format_double(rep.alpha_bound)
            << '\n';
  std::cout << "observed min u(1/2,.) on [t0, t_stop]: "
            << format_double(rep.u_half_min_window) << '\n';
  std::cout << "study: " << (rep.pass ? "pass" : "FAIL") << '\n';
  const std::filesystem::path stem =
      std::filesystem::path(cfg.out_dir) / "locate";
  save_run_record(rep.record, stem);
  std::cout << "wrote " << stem.string() << ".csv and .meta\n";
  return rep.pass ? 0 : 1;
}

int cmd_export_mesh(const std::string& stem, const std::string& t_text,
                    const std::string& out_path) {
  const RunRecord rec = load_run_record(stem);
  const double t = parse_double(t_text);
  export_mesh(rec, t, out_path);
  std::cout << "wrote " << out_path << '\n';
  return 0;
}

}  // namespace

std::string usage() {
  return "usage: quenchflow <command> ...\n"
         "  validate <cfg>                 check the standing assumptions on "
         "f and g\n"
         "  run <cfg>                      evolve one problem and record "
         "diagnostics\n"
         "  sweep <cfg>                    run a parameter sweep with barrier "
         "certificates\n"
         "  limit <cfg>                    rescaled-limit convergence study\n"
         "  locate <cfg>                   quench-location study for "
         "symmetric data\n"
         "  export-mesh <stem> <t> <out>   write the profile surface as an "
         "OBJ mesh\n"
         "config keys: f, g (required); n, J, eps, alpha, t_max, theta_q,\n"
         "  scheme (explicit-monotone|imex), dt_max, sample_every,\n"
         "  snapshot_stride, sweep_axis (eps|alpha|resolution), sweep_values,\n"
         "  horizon, eps_list, lattice_points, override_hypothesis, a_star,\n"
         "  barrier_a, barrier_b, barrier_margin, assume_samples, assume_tol,\n"
         "  out_dir, mesh_segments\n";
}

int dispatch(const std::vector<std::string>& args) {
  try {
    if (args.empty()) {
      std::cerr << usage();
      return 2;
    }
    const std::string& cmd = args[0];
    if (cmd == "--help" || cmd == "-h" || cmd == "help") {
      std::cout << usage();
      return 0;
    }
    if (cmd == "export-mesh") {
      if (args.size() != 4) {
        std::cerr << usage();
        return 2;
      }
      return cmd_export_mesh(args[1], args[2], args[3]);
    }
    if (args.size() != 2) {
      std::cerr << usage();
      return 2;
    }
    const Config cfg = load_config(args[1]);
    if (cmd == "validate") return cmd_validate(cfg);
    if (cmd == "run") return cmd_run(cfg);
    if (cmd == "sweep") return cmd_sweep(cfg);
    if (cmd == "limit") return cmd_limit(cfg);
    if (cmd == "locate") return cmd_locate(cfg);
    std::cerr << usage();
    return 2;
  } catch (const HypothesisViolated& e) {
    std::cerr << "hypothesis violated: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "expression error: " << e.what() << '\n';
    return 1;
  } catch (const SpecError& e) {
    std::cerr << "invalid problem: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace quenchflow
