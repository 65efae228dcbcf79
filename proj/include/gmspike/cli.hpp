#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gmspike/report.hpp"

namespace gmspike {

/// Parses command-line arguments (without the program name) into a
/// RunConfig. Throws DomainError on invalid input and CLI::Error on
/// malformed flags, after printing help or the parse error to out/err.
RunConfig parse_command_line(const std::vector<std::string>& args);
RunConfig parse_command_line(const std::vector<std::string>& args,
                             std::ostream& out, std::ostream& err);

/// Entry point of the `gmspike` tool. Exit codes: 0 success, 1 solver
/// failure, 2 usage error.
int cli_main(int argc, const char* const* argv);
int cli_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);

}  // namespace gmspike
