#include "quenchflow/records.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace quenchflow {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
  double v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw Error("malformed number '" + s + "'");
  return v;
}

namespace {

constexpr const char* kCsvHeader = "t,u_min,x_argmin,u_max,ux_max,eps_ut_max";

json spec_to_json(const ProblemSpec& s) {
  json j;
  j["n"] = s.n;
  j["f"] = s.f_src;
  j["g"] = s.g_src;
  j["eps"] = s.eps;
  j["alpha"] = s.alpha;
  j["J"] = s.J;
  j["t_max"] = s.t_max;
  j["theta_q"] = s.theta_q;
  j["scheme"] = scheme_name(s.scheme);
  j["dt_max"] = s.dt_max;
  j["c_diff"] = s.c_diff;
  j["c_react"] = s.c_react;
  j["c_force"] = s.c_force;
  j["sample_every"] = s.sample_every;
  j["snapshot_stride"] = s.snapshot_stride;
  return j;
}

ProblemSpec spec_from_json(const json& j) {
  ProblemSpec s = make_problem_spec(j.at("f").get<std::string>(),
                                    j.at("g").get<std::string>());
  s.n = j.at("n").get<int>();
  s.eps = j.at("eps").get<double>();
  s.alpha = j.at("alpha").get<double>();
  s.J = j.at("J").get<int>();
  s.t_max = j.at("t_max").get<double>();
  s.theta_q = j.at("theta_q").get<double>();
  s.scheme = scheme_from_name(j.at("scheme").get<std::string>());
  s.dt_max = j.at("dt_max").get<double>();
  s.c_diff = j.at("c_diff").get<double>();
  s.c_react = j.at("c_react").get<double>();
  s.c_force = j.at("c_force").get<double>();
  s.sample_every = j.at("sample_every").get<int>();
  s.snapshot_stride = j.at("snapshot_stride").get<int>();
  return s;
}

}  // namespace

void save_run_record(const RunRecord& record,
                     const std::filesystem::path& stem) {
  const std::filesystem::path csv_path = stem.string() + ".csv";
  const std::filesystem::path meta_path = stem.string() + ".meta";
  if (stem.has_parent_path())
    std::filesystem::create_directories(stem.parent_path());

  {
    std::ofstream csv(csv_path);
    if (!csv) throw Error("cannot open " + csv_path.string() + " for writing");
    csv << kCsvHeader << '\n';
    for (const Sample& s : record.series) {
      csv << format_double(s.t) << ',' << format_double(s.u_min) << ','
          << format_double(s.x_argmin) << ',' << format_double(s.u_max) << ','
          << format_double(s.ux_max) << ',' << format_double(s.eps_ut_max)
          << '\n';
    }
  }

  json j;
  j["format"] = "quenchflow-run/1";
  j["spec"] = spec_to_json(record.spec);
  j["verdict"] = verdict_name(record.verdict);
  j["t_stop"] = record.t_stop;
  if (record.t_star_estimate)
    j["t_star_estimate"] = *record.t_star_estimate;
  else
    j["t_star_estimate"] = nullptr;
  j["fit_residual"] = record.fit_residual;
  j["quench_locations"] = record.quench_locations;
  json arcs = json::array();
  for (const QuenchArc& a : record.arcs) {
    arcs.push_back({{"begin_node", a.begin_node},
                    {"length", a.length},
                    {"x_min", a.x_min},
                    {"u_min", a.u_min},
                    {"whole_circle", a.whole_circle}});
  }
  j["arcs"] = arcs;
  j["step_count"] = record.step_count;
  j["wall_time"] = record.wall_time;
  j["abort_reason"] = record.abort_reason;
  json snaps = json::array();
  for (const Snapshot& s : record.snapshots)
    snaps.push_back({{"t", s.t}, {"u", s.u}});
  j["snapshots"] = snaps;

  std::ofstream meta(meta_path);
  if (!meta) throw Error("cannot open " + meta_path.string() + " for writing");
  meta << j.dump(1) << '\n';
}

RunRecord load_run_record(const std::filesystem::path& stem) {
  const std::filesystem::path csv_path = stem.string() + ".csv";
  const std::filesystem::path meta_path = stem.string() + ".meta";

  RunRecord rec;

  {
    std::ifstream meta(meta_path);
    if (!meta)
      throw CorruptRecord(meta_path.string(),
                          "missing record file " + meta_path.string());
    json j;
    try {
      meta >> j;
      if (j.at("format").get<std::string>() != "quenchflow-run/1")
        throw Error("unknown format tag");
      rec.spec = spec_from_json(j.at("spec"));
      rec.verdict = verdict_from_name(j.at("verdict").get<std::string>());
      rec.t_stop = j.at("t_stop").get<double>();
      if (!j.at("t_star_estimate").is_null())
        rec.t_star_estimate = j.at("t_star_estimate").get<double>();
      rec.fit_residual = j.at("fit_residual").get<double>();
      rec.quench_locations =
          j.at("quench_locations").get<std::vector<double>>();
      for (const json& a : j.at("arcs")) {
        QuenchArc arc;
        arc.begin_node = a.at("begin_node").get<int>();
        arc.length = a.at("length").get<int>();
        arc.x_min = a.at("x_min").get<double>();
        arc.u_min = a.at("u_min").get<double>();
        arc.whole_circle = a.at("whole_circle").get<bool>();
        rec.arcs.push_back(arc);
      }
      rec.step_count = j.at("step_count").get<long>();
      rec.wall_time = j.at("wall_time").get<double>();
      rec.abort_reason = j.at("abort_reason").get<std::string>();
      for (const json& s : j.at("snapshots")) {
        Snapshot snap;
        snap.t = s.at("t").get<double>();
        snap.u = s.at("u").get<std::vector<double>>();
        rec.snapshots.push_back(std::move(snap));
      }
    } catch (const std::exception& e) {
      throw CorruptRecord(meta_path.string(), "corrupt record " +
                                                  meta_path.string() + ": " +
                                                  e.what());
    }
  }

  {
    std::ifstream csv(csv_path);
    if (!csv)
      throw CorruptRecord(csv_path.string(),
                          "missing record file " + csv_path.string());
    std::string line;
    if (!std::getline(csv, line) || line != kCsvHeader)
      throw CorruptRecord(csv_path.string(), "bad CSV header in " +
                                                 csv_path.string());
    while (std::getline(csv, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string cell;
      double vals[6];
      for (int i = 0; i < 6; ++i) {
        if (!std::getline(ls, cell, ','))
          throw CorruptRecord(csv_path.string(), "truncated CSV row in " +
                                                     csv_path.string());
        try {
          vals[i] = parse_double(cell);
        } catch (const Error& e) {
          throw CorruptRecord(csv_path.string(),
                              csv_path.string() + ": " + e.what());
        }
      }
      rec.series.push_back(
          {vals[0], vals[1], vals[2], vals[3], vals[4], vals[5]});
    }
    if (rec.series.empty())
      throw CorruptRecord(csv_path.string(),
                          "empty series in " + csv_path.string());
  }

  return rec;
}

}  // namespace quenchflow
