#pragma once

#include <string>
#include <vector>

#include "radkin/config.hpp"

namespace radkin {

/// Process exit codes.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitGuard = 4;

int exit_code_for(ErrorKind kind);

struct RunOutcome {
  int exit_code = kExitOk;
  std::string config_hash;
  /// Paths written, in creation order.
  std::vector<std::string> files;
  std::string message;
};

/// Run the configured experiment and write its artifacts into
/// config.output_dir, every file name prefixed with "<kind>-<hash>". On
/// failure a "<kind>-<hash>-failure.json" record is written as well.
RunOutcome run_experiment(const RunConfig& config);

}  // namespace radkin
