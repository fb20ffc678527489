#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace modelsearch {

/// Runs one command line (without the program name). Returns the exit
/// status: 0 on success and for --help, 2 for usage errors, 1 for failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace modelsearch
