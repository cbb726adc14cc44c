#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cgflab::cli {

// Parses and executes one command line (without the program name).
// Writes results to `out`, problems to `err`.  Returns the process exit
// code: 0 success, 1 input error, 2 numerical or fit failure, 3 internal
// error.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace cgflab::cli
