#pragma once

#include <string>
#include <vector>

namespace nvsram {

// Exit codes: 0 success, 1 config, 2 solver/numeric, 3 decode.
int run_cli(const std::vector<std::string>& args);

} // namespace nvsram
