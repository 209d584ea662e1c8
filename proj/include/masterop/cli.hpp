#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace masterop::cli {

/// Exit codes shared by every command.
enum ExitCode : int { Ok = 0, CheckFailed = 1, Usage = 2, Numeric = 3 };

/// Runs the command line `args` (without the program name). Tables and JSON go to `out`,
/// diagnostics and defect summaries (unless redirected) to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace masterop::cli
