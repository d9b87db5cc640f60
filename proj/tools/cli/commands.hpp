#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace illumkit::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kSuccess = 0,
  kRuntimeError = 1,  // I/O, data or threshold failures
  kUsageError = 2,    // bad flags, unknown method names, missing arguments
};

/// Runs `illumkit <args...>` (args excludes the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace illumkit::cli
