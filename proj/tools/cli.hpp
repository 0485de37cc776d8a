#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace poseprompt::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kDataError = 3,
  kWireError = 4,
};

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace poseprompt::cli
