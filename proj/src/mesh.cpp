#include "quenchflow/mesh.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "quenchflow/records.hpp"

namespace quenchflow {

void export_mesh(const RunRecord& record, double t,
                 const std::filesystem::path& path, int segments) {
  if (record.spec.n != 2)
    throw UnsupportedDimension(
        "mesh export draws a surface in R^3 and needs n = 2, spec has n = " +
        std::to_string(record.spec.n));
  if (segments < 3) throw SpecError("mesh needs at least 3 segments");
  if (record.snapshots.empty())
    throw SnapshotMissing("record holds no snapshots");

  const double lo = record.snapshots.front().t;
  const double hi = record.snapshots.back().t;
  const double slack = 1e-12 * (1 + std::abs(hi));
  if (t < lo - slack || t > hi + slack)
    throw SnapshotMissing("no snapshot at or bracketing t = " +
                          format_double(t) + " (range [" + format_double(lo) +
                          ", " + format_double(hi) + "])");

  const Snapshot* best = &record.snapshots.front();
  for (const Snapshot& s : record.snapshots)
    if (std::abs(s.t - t) < std::abs(best->t - t)) best = &s;

  const int J = static_cast<int>(best->u.size());
  const int K = segments;
  const double dx = 1.0 / J;

  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");

  out << "# quenchflow surface of revolution\n";
  out << "# J=" << J << " K=" << K << " t=" << format_double(best->t) << "\n";
  for (int j = 0; j < J; ++j) {
    const double x = j * dx;
    const double r = best->u[j];
    for (int k = 0; k < K; ++k) {
      const double th = 2 * std::numbers::pi * k / K;
      out << "v " << format_double(x) << ' '
          << format_double(r * std::cos(th)) << ' '
          << format_double(r * std::sin(th)) << '\n';
    }
  }
  auto vid = [&](int j, int k) {  // 1-based OBJ indices, periodic
    return ((j % J) * K + (k % K)) + 1;
  };
  for (int j = 0; j < J; ++j) {
    for (int k = 0; k < K; ++k) {
      out << "f " << vid(j, k) << ' ' << vid(j + 1, k) << ' '
          << vid(j + 1, k + 1) << '\n';
      out << "f " << vid(j, k) << ' ' << vid(j + 1, k + 1) << ' '
          << vid(j, k + 1) << '\n';
    }
  }
}

}  // namespace quenchflow
