// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mtsrnn::cli {

/// Process exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,      // bad flags or inconsistent configuration
  kDataError = 2,  // unreadable or invalid dataset / checkpoint
  kNumericError = 3,
};

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name, e.g. {"generate", "--seed", "7", "--out", "d.jsonl"}.
int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err);

} // namespace mtsrnn::cli
