#pragma once

#include <string>
#include <vector>

namespace evoshift {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes: 0 success, 1 invalid arguments or inputs, 2 runtime failure.
int run_cli(int argc, char** argv);
/// Same as above; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace evoshift
