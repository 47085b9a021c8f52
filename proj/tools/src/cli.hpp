#pragma once

#include <ostream>

namespace tmfrac::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitBudget = 2;
inline constexpr int kExitUsage = 64;

/// Parses argv, runs one subcommand, writes artifacts and prints a JSON
/// summary on `out`. Diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tmfrac::cli
