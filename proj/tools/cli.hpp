#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hbs::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericFailure = 3 };

/// Runs one command line (without the program name). Default job count comes
/// from HBS_JOBS when --jobs is absent.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hbs::cli
