#pragma once

#include <iosfwd>

namespace saccadic {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitEmpty = 3;

/// Entry point of the `saccadic` tool. Subcommands: convert, stats, fft,
/// rates, render, classify. Returns 0 on success, 2 for usage or path errors,
/// 3 when the input holds no recordings, 1 for anything else.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace saccadic
