#pragma once

#include <iosfwd>

namespace mbisac::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalFailure = 3;

/// Entry point of the command-line tool. Subcommands: calibrate, simulate,
/// train, evaluate, sweep, ratio-study, fd-check.
int runCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Version string baked in at build time.
const char* versionString();

}  // namespace mbisac::harness
