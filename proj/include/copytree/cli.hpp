#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace copytree {

// Runs one CLI invocation. Returns the process exit code: 0 on success,
// 1 on input errors, 2 on infeasibility or contract violations.
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace copytree
