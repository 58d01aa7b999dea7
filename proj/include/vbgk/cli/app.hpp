#pragma once

#include <iosfwd>

namespace vbgk::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitConfig = 2;

const char* version();

// Entry point of the `vbgk` binary: parses arguments, resolves and validates
// the configuration, runs one experiment and writes its manifest.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vbgk::cli
