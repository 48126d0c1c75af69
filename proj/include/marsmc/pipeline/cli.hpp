#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace marsmc::pipeline {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitSampler = 4,
};

/// Entry point of the `marsmc` tool. Subcommands: simulate, estimate, select,
/// mc, detrend. Failures print a one-line JSON error record to `err`.
int cli_main(int argc, const char* const* argv);
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace marsmc::pipeline
