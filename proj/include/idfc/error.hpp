#pragma once

#include <stdexcept>
#include <string>

namespace idfc {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad run configuration (unknown model name, inconsistent ranges, ...).
struct ConfigError : Error {
  using Error::Error;
};

// Bad or incomplete input data (malformed rows, gaps in auction series, ...).
struct DataError : Error {
  using Error::Error;
};

}  // namespace idfc
