#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace wva {

#ifndef WVA_VERSION
#define WVA_VERSION "0.0.0"
#endif

inline constexpr std::string_view kVersion = WVA_VERSION;

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitTolerance = 2;

/// Runs `wva-sim <args...>` (args excludes the program name). Reports go to
/// --out when given, otherwise to `out`; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wva
