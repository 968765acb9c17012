#pragma once

#include <iosfwd>

namespace plateau {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitNumerical = 2,
  kExitHypothesis = 3,
};

/// Subcommands approximate, solve, converge and analyze. Returns an ExitCode.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace plateau
