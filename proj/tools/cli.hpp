#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stochlog::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kConfig = 2,
    kValidation = 3,
    kCheckFailed = 4,
};

/// Runs one subcommand. `args` excludes the program name. Results go to `out`
/// (or the --out file), diagnostics to `err`.
int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stochlog::cli
