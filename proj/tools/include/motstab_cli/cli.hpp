#pragma once

#include <iosfwd>

namespace motstab::cli {

/// Exit codes of the command-line tool.
inline constexpr int kOk = 0;
inline constexpr int kInternal = 1;
inline constexpr int kDomain = 2;
inline constexpr int kPipeline = 3;

/// Parses argv and runs one subcommand. Results go to `out` (or the file named
/// by --output), diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace motstab::cli
