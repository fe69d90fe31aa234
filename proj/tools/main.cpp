#include <string>
#include <vector>

#include "quenchflow/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return quenchflow::dispatch(args);
}
