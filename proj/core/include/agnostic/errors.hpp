#pragma once

#include <stdexcept>
#include <string>

namespace agnostic {

// Base class for every error the library reports. The CLI maps all of them
// to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value (out of range, malformed spec string).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// API misuse: dimension mismatch, underdetermined system, too few samples.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Bad input data: non-finite values, labels outside the declared mode.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A feature, cover or grid enumeration would exceed its configured cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

}  // namespace agnostic
