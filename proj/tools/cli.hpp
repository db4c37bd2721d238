#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wnc::cli {

/// Exit statuses of the command-line front end.
enum ExitCode : int { ok = 0, invalid_input = 1, numeric_failure = 2, hard_failure = 3 };

/// Runs one invocation. `args` excludes the program name. Tables go to --out
/// (with a .meta.json sidecar) or to `out` when no path is given.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wnc::cli
