#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hapstack {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `hapstack` executable. args excludes the program name.
// Data records go to `out`; diagnostics, usage text and summaries printed
// alongside stdout data go to `err`.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace hapstack
