#pragma once

#include <iosfwd>

namespace mrgap {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

/// Entry point of the mrgap command line: generate, denoise, interpolate,
/// evaluate and estimate-dim. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mrgap
