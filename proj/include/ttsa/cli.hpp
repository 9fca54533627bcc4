#pragma once

#include <string>
#include <vector>

namespace ttsa {

// Full command-line front end. Returns the process exit code: 0 on success,
// 1 on a validation/config error, 2 on a numerical failure.
int run_cli(int argc, const char* const* argv);

// Same, for tests: args without the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace ttsa
