#pragma once

#include <string>
#include <vector>

namespace hesscut {

// Runs the command-line front end on the given arguments (without the
// program name). Returns the process exit code: 0 on success, 2 on
// validation/usage errors, 3 when a numeric or node budget was exceeded.
int run_cli(const std::vector<std::string>& args);

}  // namespace hesscut
