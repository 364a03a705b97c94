#pragma once

#include <ostream>

namespace spvs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitConfigError = 2;

// Parses argv and runs one subcommand. Never throws: library errors are
// reported on `err` and turned into exit codes.
int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spvs::cli
