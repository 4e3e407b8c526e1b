#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace sentalign::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kNumericalFailure = 3,
};

/// Runs one subcommand. `args` excludes the program name. Structured output
/// goes to `out`, progress and diagnostics to `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace sentalign::cli
