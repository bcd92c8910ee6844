#pragma once

#include <iosfwd>

namespace rpca::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kIo = 2,
  kNumerical = 3,
  kNotConverged = 4,
};

// Entry point of the rpca command-line tool. Subcommands: gen, solve,
// bench, compare. The only environment variable consulted is RPCA_JOBS
// (default worker count for bench).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rpca::cli
