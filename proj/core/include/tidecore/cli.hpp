// Command-line entry points. Exit codes: 0 success, 1 at least one check not
// satisfied, 2 usage or configuration error, 3 divergence.
#pragma once

#include <string>
#include <vector>

namespace tidal {

int run_command(const std::vector<std::string>& args);

}  // namespace tidal
