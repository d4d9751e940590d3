#pragma once

#include <stdexcept>
#include <string>

namespace kcl {

// Error taxonomy shared by the library and the CLI.
// The CLI maps ConfigError to exit code 2 and everything else to 3.

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid argument or broken contract on an in-process call.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent external data (files, checkpoints, logs).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operation invoked in a state that cannot serve it (e.g. empty memory).
struct StateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace kcl
