#pragma once

namespace stadium {

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;    // bad arguments or failed precondition
inline constexpr int kExitNumeric = 3;  // an iteration failed to converge
inline constexpr int kExitVerify = 4;   // a verification check failed

/// Entry point of the command-line tool; argv follows main() conventions.
int run_cli(int argc, const char* const* argv);

}  // namespace stadium
