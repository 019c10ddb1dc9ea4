#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace deepirl {

/// Raised when an argument violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an internal contract is broken, e.g. backward without forward.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Value iteration produced non-finite values or failed to settle.
class NumericDivergence : public std::runtime_error {
 public:
  NumericDivergence(const std::string& what, std::size_t state)
      : std::runtime_error(what), state_(state) {}

  std::size_t state() const noexcept { return state_; }

 private:
  std::size_t state_;
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

}  // namespace detail
}  // namespace deepirl
