#pragma once

#include <string>
#include <vector>

namespace hybridwind::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCompute = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (args[0] is the program name) and returns the
/// process exit code. Diagnostics go to stderr.
int run(const std::vector<std::string>& args);

}  // namespace hybridwind::cli
