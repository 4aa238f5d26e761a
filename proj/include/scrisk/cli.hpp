#pragma once

#include <string>
#include <vector>

namespace scrisk {
namespace cli {

// Runs one subcommand (synth, features, train, eval, explain, rankdiff).
// Exit codes: 0 success, 1 usage, 2 missing input, 3 validation failure,
// 4 internal error.
int run(const std::vector<std::string>& args);

}  // namespace cli
}  // namespace scrisk
