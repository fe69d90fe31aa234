#pragma once

#include <filesystem>

#include "quenchflow/solver.hpp"

namespace quenchflow {

// Writes the surface of revolution {(x, u cos th, u sin th)} of the snapshot
// nearest to t as a Wavefront OBJ triangle mesh: J*K vertices, quads split
// into triangles, periodically closed in both directions. Requires n = 2
// (surface in R^3) and a snapshot at or bracketing t.
void export_mesh(const RunRecord& record, double t,
                 const std::filesystem::path& path, int segments = 64);

}  // namespace quenchflow
