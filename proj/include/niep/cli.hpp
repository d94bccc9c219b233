// Command-line front end. Exit codes:
//   0 realizable / success      1 not realizable        2 unknown
//   3 guo estimate truncated by budget
//   20 + s  example1 step s failed
//   64 usage or parse error     65 invalid budget or configuration
//   66 constraint violation     70 internal error       74 I/O error

#ifndef NIEP_CLI_HPP
#define NIEP_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace niep {

enum ExitCode : int {
  kExitRealizable = 0,
  kExitNotRealizable = 1,
  kExitUnknown = 2,
  kExitTruncated = 3,
  kExitExampleStep = 20,
  kExitUsage = 64,
  kExitConfig = 65,
  kExitConstraint = 66,
  kExitInternal = 70,
  kExitIo = 74,
};

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace niep

#endif  // NIEP_CLI_HPP
