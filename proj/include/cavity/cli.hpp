#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cavity {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNotConverged = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command. `args` excludes the program name. Diagnostics go to
/// `err`, summaries to `out`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cavity
