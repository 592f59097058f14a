#pragma once

#include <iosfwd>

namespace mf::cli {

/// Exit codes of the momfuse tool.
enum Exit : int { kOk = 0, kValidation = 1, kNotConverged = 2 };

/// Parses argv (argv[0] is the program name) and runs one subcommand.
/// Reports go to `out`, diagnostics to `err`.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace mf::cli
