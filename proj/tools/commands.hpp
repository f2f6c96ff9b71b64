#pragma once

#include <iosfwd>

namespace hostcap::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kUnacceptable = 3,
  kNumerical = 4,
  kData = 5,
};

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace hostcap::cli
