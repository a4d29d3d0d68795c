#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace asynciter {

// Malformed arguments, dimension mismatches, inconsistent parameters.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite value produced during an iteration. `iteration` is 0 when the
// failure happened outside of an engine run.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what, std::size_t iteration = 0)
      : std::runtime_error(what), iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

// Fixed-point solve exhausted its iteration cap.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Verification requested on a trace too short to support it.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace asynciter
