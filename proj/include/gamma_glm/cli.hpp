#pragma once

#include <iosfwd>

namespace gamma_glm {

/// Exit status contract of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 2,
  kExitSolverError = 3,
};

/// Entry point for the `fit`, `cv` and `simulate` subcommands.
int run_cli(int argc, const char* const argv[], std::ostream& out, std::ostream& err);

} // namespace gamma_glm
