#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace simlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Raised when a drift evaluation meets a non-finite or overflowing state.
class DivergedStateError : public Error {
 public:
  DivergedStateError(const std::string& what, std::size_t index)
      : Error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace simlab
