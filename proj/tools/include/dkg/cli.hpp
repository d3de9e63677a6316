#pragma once

#include <iosfwd>

namespace dkg {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `dkg` tool: synth, train, predict, eval, trace.
// Errors go to `err` prefixed with "dkg: error: ".
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dkg
