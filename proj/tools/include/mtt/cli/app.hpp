#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mtt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeError = 2;

/// Entry point of the `mtt` tool. `args` excludes the program name.
///
///   mtt <simulate|track|eval|sweep> [--config PATH] [--seed N] [--out DIR]
///       [--filter gpf|pf|kf] [--sensor mean|grid]
///
/// Returns 0 on success, 1 on configuration/usage errors, 2 on runtime errors.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mtt::cli
