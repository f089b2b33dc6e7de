#pragma once

#include <stdexcept>
#include <string>

namespace lrf {

/// Base of every error raised by the library. The CLI maps each subclass
/// onto a distinct exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* error_class() const noexcept = 0;
};

/// Invalid arguments or configuration.
class UsageError : public Error {
 public:
  using Error::Error;
  const char* error_class() const noexcept override { return "usage"; }
};

/// Inconsistent or malformed data (shape mismatches, bad manifests, corrupt models).
class DataError : public Error {
 public:
  using Error::Error;
  const char* error_class() const noexcept override { return "data"; }
};

/// Numerical failures such as a reduced system that is not positive definite.
class NumericError : public Error {
 public:
  using Error::Error;
  const char* error_class() const noexcept override { return "numeric"; }
};

/// Filesystem failures.
class IoError : public Error {
 public:
  using Error::Error;
  const char* error_class() const noexcept override { return "io"; }
};

}  // namespace lrf
