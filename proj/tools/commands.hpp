#ifndef EXPLICABLE_TOOLS_COMMANDS_HPP_
#define EXPLICABLE_TOOLS_COMMANDS_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace explicable::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kValidation = 3,
  kIo = 4,
};

/// Runs one subcommand. `args` excludes the program name. Failures print a
/// single line `error code=<code> [line=<n>] msg=<text>` to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace explicable::cli

#endif  // EXPLICABLE_TOOLS_COMMANDS_HPP_
