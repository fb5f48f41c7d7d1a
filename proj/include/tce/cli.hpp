#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tce::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kDataError = 2,
  kGradcheckFailure = 3,
};

/// Entry point for the `tce` tool: train, sweep, gradcheck, summarize.
int run(int argc, char** argv);
/// Same, with args excluding the program name and explicit streams.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tce::cli
