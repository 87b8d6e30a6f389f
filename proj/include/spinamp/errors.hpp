#pragma once

#include <stdexcept>
#include <string>

namespace spinamp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Slot or index outside the valid range of a layout.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument combination (equal slots, out-of-range neighbor count, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// An operator failed a structural check (Hermiticity, unitarity, trace).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Unsupported model / run configuration. `key()` names the offending setting
/// when one is known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message, std::string key = {})
      : Error(message), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Drift of a conserved quantity or a non-real expectation value beyond tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Quadrature for an average Hamiltonian did not stabilize.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failures while persisting artifacts.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace spinamp
