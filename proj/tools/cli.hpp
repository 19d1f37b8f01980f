#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dips::cli {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kUsage = 2 };

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dips::cli
