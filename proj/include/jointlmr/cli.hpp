#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace jointlmr::cli {

/// Process exit codes. Each error class maps to exactly one code.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kValidation = 3,
  kIo = 4,
  kNumerical = 5,
};

inline constexpr int kManifestVersion = 1;

/// Entry point shared by the executable and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace jointlmr::cli
