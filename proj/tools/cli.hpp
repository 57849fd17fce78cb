#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lesionbench::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartialFailure = 1;
inline constexpr int kExitInvalid = 2;

/// Runs the command line (args[0] is the program name). Normal output goes to
/// `out`, diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lesionbench::cli
