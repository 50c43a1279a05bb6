// Subcommands of the qcs tool: simulate, reconstruct, sweep.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qcs::app {

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,
  kConfigError = 2,
  kStalled = 3,
  kInfeasible = 4,
};

/// Parses `args` (without the program name) and runs the chosen subcommand.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qcs::app
