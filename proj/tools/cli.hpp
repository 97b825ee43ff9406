#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace resgntk::cli {

/// Exit codes: 0 success, 1 I/O or runtime failure, 2 usage or validation error.
enum ExitCode : int { kOk = 0, kRuntimeError = 1, kUsageError = 2 };

/// Runs the command line `args` (without the program name). Results go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace resgntk::cli
