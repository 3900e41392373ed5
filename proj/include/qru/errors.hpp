#pragma once

#include <stdexcept>
#include <string>

namespace qru {

// Base class for every error raised by the library. The runner maps these
// to exit code 2 (runtime) unless they come from config validation.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimensionError : public Error {
 public:
  using Error::Error;
};

class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ArityError : public Error {
 public:
  using Error::Error;
};

class NotLayeredError : public Error {
 public:
  using Error::Error;
};

/// Raised when a sparse lattice or dense tensor object would exceed its
/// configured size. `module()` names the component that refused.
class CapacityError : public Error {
 public:
  CapacityError(std::string module, const std::string& what)
      : Error(module + ": " + what), module_(std::move(module)) {}
  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

class AnharmonicError : public Error {
 public:
  using Error::Error;
};

class LatticeMismatchError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace qru
