#pragma once

#include <stdexcept>
#include <string>

namespace tradenet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed files, unknown codes, invalid configuration.
/// The CLI maps it to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not produce a result (singular design,
/// non-convergence, degenerate graph). The CLI maps it to exit code 3.
class ComputationError : public Error {
 public:
  using Error::Error;
};

/// Non-fatal diagnostics are routed through here so tests can silence them.
void warn(const std::string& message);
void set_warnings_enabled(bool enabled);

}  // namespace tradenet
