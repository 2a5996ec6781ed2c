// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

namespace cbss {

// Invalid grid geometry, window setup, or solver parameters.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Operands whose shapes/grids do not match.
struct DimensionError : std::runtime_error {
  explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Window whose tightening normalizer vanishes somewhere.
struct DegenerateWindowError : ConfigError {
  explicit DegenerateWindowError(const std::string& msg) : ConfigError(msg) {}
};

// Non-finite solver state.
struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& msg, int iteration_)
      : std::runtime_error(msg), iteration(iteration_) {}
  int iteration;
};

// Unreadable or unsupported audio/file input.
struct AudioIoError : std::runtime_error {
  explicit AudioIoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cbss
