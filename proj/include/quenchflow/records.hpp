#pragma once

#include <filesystem>
#include <string>

#include "quenchflow/solver.hpp"

namespace quenchflow {

// A run record persists as two files sharing a stem: <stem>.csv holds the
// diagnostic series (header t,u_min,x_argmin,u_max,ux_max,eps_ut_max) and
// <stem>.meta holds everything else as JSON, including snapshots. Doubles
// are written in shortest round-trip form, so load is field-identical.
void save_run_record(const RunRecord& record,
                     const std::filesystem::path& stem);

// Throws CorruptRecord (with the offending path) on missing, truncated, or
// malformed files.
RunRecord load_run_record(const std::filesystem::path& stem);

std::string format_double(double v);      // shortest round-trip text
double parse_double(const std::string&);  // strict; throws Error

}  // namespace quenchflow
