#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace msp::cli {

// Runs one msp-dst invocation. `args` excludes the program name. Returns the
// process exit code: 0 success, 1 runtime failure, 2 usage or config error.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace msp::cli
