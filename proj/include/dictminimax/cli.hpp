#pragma once

#include <ostream>

namespace dictminimax {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitPackingInfeasible = 3;
inline constexpr int kExitIo = 4;

/// Entry point of the `dictminimax` tool. Reports are written to `out` as
/// `key,value` lines; diagnostics and errors go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dictminimax
