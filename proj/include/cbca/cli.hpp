#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cbca {

// Runs the command line (args excludes the program name) and returns the exit status:
// 0 ok, 1 internal error, 2 input error, 3 compatibility error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cbca
