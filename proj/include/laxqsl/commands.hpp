// commands.hpp - laxqsl command-line front end
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace laxqsl {

// Exit codes
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // computational failure or failed checks
inline constexpr int kExitUsage = 2;    // invalid flags or unreadable input

// Runs `laxqsl <command> [flags]`. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace laxqsl
