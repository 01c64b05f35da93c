// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace strap {

// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid run configuration (bad flag value, malformed config file).
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Invalid or inconsistent input data (missing column, dangling id, ...).
struct DataError : Error {
  explicit DataError(const std::string& msg) : Error(msg) {}
};

// Shape mismatch between tensors.
struct DimensionError : Error {
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// Non-finite values where finite ones are required (diverged training, ...).
struct NumericalError : Error {
  explicit NumericalError(const std::string& msg) : Error(msg) {}
};

}  // namespace strap
