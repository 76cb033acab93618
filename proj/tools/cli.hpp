#ifndef PTYCHO_TOOLS_CLI_HPP
#define PTYCHO_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace ptycho::cli
{

/// Parses `args` (without the program name) and runs one subcommand.
/// Returns 0 on success, 1 on a library error and 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ptycho::cli

#endif
