#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace stp::cli {

enum ExitCode : int { ok = 0, usage = 1, data = 2, internal = 3 };

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stp::cli
