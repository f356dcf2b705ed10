#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wbc::cli {

enum ExitCode { kSuccess = 0, kInequalityFailed = 1, kUsage = 2, kSolverError = 3 };

/// Runs one `wbc` subcommand. `args` excludes the program name. Structured
/// output goes to `--out` (written atomically) or to `out`; diagnostics go
/// to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

} // namespace wbc::cli
