#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace evoforge {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitProvider = 3;
inline constexpr int kExitIo = 4;

/// Entry point behind the `evoforge` binary. `args` excludes the program name.
/// Subcommands: optimize, evaluate, report, resample-init.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace evoforge
