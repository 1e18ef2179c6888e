#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace clvkit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // the pipeline raised a module error
inline constexpr int kExitUsage = 2;    // unknown subcommand, flag or config key; bad flag value

/// Runs one subcommand. `args` excludes the program name. Primary output goes to --output or `out`;
/// diagnostics and, without --output, the run metadata go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace clvkit
