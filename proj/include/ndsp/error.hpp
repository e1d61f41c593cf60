#pragma once

#include <stdexcept>
#include <string>

namespace ndsp {

// Bad argument to an operation (horizon 0, point out of range, eps <= 0, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Configuration problem; `field` is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// The exhaustive oracle refused an instance that exceeds its budget.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bisection could not bracket a crossing of the threshold.
class NoJumpError : public std::runtime_error {
 public:
  NoJumpError(const std::string& message, double lowValue, double highValue)
      : std::runtime_error(message), low_(lowValue), high_(highValue) {}
  double lowValue() const noexcept { return low_; }
  double highValue() const noexcept { return high_; }

 private:
  double low_;
  double high_;
};

// A postcondition verified inside an operation failed.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace ndsp
