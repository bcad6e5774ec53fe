#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace saddlefit::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,       // unknown model, bad order, bad flags, compare without oracle
  kBadData = 3,     // malformed or too-short CSV input
  kBadStart = 4,    // non-finite likelihood at theta0
};

/// Runs the command line `args` (args[0] is the program name) writing normal
/// output to `out` and diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace saddlefit::cli
