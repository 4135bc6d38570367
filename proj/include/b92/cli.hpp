#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace b92::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kTransportError = 3,
};

// Entry point shared by the b92 executable and the tests. Output that the
// determinism guarantees cover goes to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace b92::cli
