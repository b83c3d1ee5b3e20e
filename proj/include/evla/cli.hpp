#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace evla {

/// Exit codes: 0 ok, 1 validation failure, 2 configuration or usage error, 3 solver error.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitConfig = 2, kExitSolver = 3 };

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace evla
