#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace kpack {

// Runs one CLI invocation. args excludes the program name. Exit codes:
// 0 packed/ok, 2 extremal, 3 diagnosis or verification violations, 1 error
// (including usage errors).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kpack
