#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace agnostic::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFlagged = 1;
inline constexpr int kExitError = 2;

// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "AGNOSTIC_OUT_DIR";

// Entry point of the `agnostic` executable. args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace agnostic::cli
