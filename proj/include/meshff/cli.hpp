#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace meshff::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kDataError = 2;
inline constexpr int kRuntimeError = 3;

/// Runs one `meshff` invocation. `args` excludes the program name. Reports
/// go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace meshff::cli
