#pragma once

#include <iosfwd>

namespace calib {

/// Exit codes of the `calib` tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitValidation = 2,
  kExitConvergence = 3,
  kExitIo = 4,
};

/// Entry point of the `calib` command line tool. Results go to `out` as
/// JSON; failures go to `err` as "error: <Code>: <message>".
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace calib
