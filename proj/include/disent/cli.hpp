#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace disent {

inline constexpr const char* kToolName = "disent";
inline constexpr const char* kToolVersion = "1.0.0";

// Entry point of the command-line tool. args excludes the program name.
// Returns the process exit code: 0 on success, 2 on usage errors, 1 on any
// other failure. Failures also write {"error": {...}} JSON to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace disent
