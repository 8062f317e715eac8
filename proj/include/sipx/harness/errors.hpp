// Error categories mapped onto CLI exit codes.
#pragma once

#include <stdexcept>
#include <string>

namespace sipx {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitRuntime = 3, kExitAcceptance = 4 };

/// Schema violations, invalid parameters and output collisions.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sipx
