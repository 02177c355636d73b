#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ccf::cli {

/// Exit codes are part of the scripting contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Parses `args` (without the program name) and dispatches a subcommand.
/// Never throws; every failure maps to an exit code with a message on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ccf::cli
