#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mixgen::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Runs one `mixgen` invocation. JSON results go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mixgen::cli
