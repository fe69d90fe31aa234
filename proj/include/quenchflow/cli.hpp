#pragma once

#include <string>
#include <vector>

namespace quenchflow {

// Subcommand driver behind the quenchflow binary:
//   validate <cfg> | run <cfg> | sweep <cfg> | limit <cfg> | locate <cfg> |
//   export-mesh <record-stem> <t> <out.obj>
// Exit codes: 0 success, 1 hypothesis or validation failure, 2 runtime or
// usage error.
int dispatch(const std::vector<std::string>& args);

std::string usage();

}  // namespace quenchflow
