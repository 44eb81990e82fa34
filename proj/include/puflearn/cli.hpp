#pragma once

#include <string>
#include <vector>

namespace puflearn::cli {

/// Batch experiment front-end. args excludes the program name.
/// Exit codes: 0 success, 2 config error, 3 numerical failure.
int run(const std::vector<std::string>& args);

}  // namespace puflearn::cli
