#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace routediag {

// Exit codes of every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the routediag tool. `args` excludes the program name.
// Subcommands: gen, solve, diagnose, bench, report.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace routediag
