#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fastpaint::cli {

// Stable process exit codes.
enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kIo = 2,
    kNumeric = 3,
};

// Runs one invocation; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fastpaint::cli
